#pragma once

#include <iosfwd>
#include <string>

#include "gmmsi/model.hpp"

namespace gmmsi {

/// Model files are JSON documents:
///
///   {
///     "dims":  {"n1": 20, "n2": 12, "k1": 2, "k2": 2},
///     "prior": [0.25, 0.25, 0.25, 0.25],          // row-major k1 x k2
///     "component.1.1": {
///       "mu1": [...], "mu2": [...],                // optional, default 0
///       "factors": {"p_c1": [[...]], "p_c2": [[...]],
///                   "p_1":  [[...]], "p_2":  [[...]]}
///     },
///     "component.1.2": {
///       "sigma1": [[...]], "sigma2": [[...]], "sigma12": [[...]]
///     }
///   }
///
/// Matrices are arrays of rows. A factor with no columns may be written as
/// `[]`. Component labels are one-based.
JointGmm parse_model(const std::string& text);
JointGmm load_model(const std::string& path);

std::string serialize_model(const JointGmm& model);
void save_model(const JointGmm& model, const std::string& path);

}  // namespace gmmsi
