/*
 Copyright 2026 The nugap Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef NUGAP_NELDER_MEAD_HPP
#define NUGAP_NELDER_MEAD_HPP

#include <Eigen/Dense>

#include <functional>

namespace nugap::detail {

struct SimplexResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
};

/// Minimizes f inside the box [lo, hi]; trial points are projected onto the box.
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd start,
                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int max_evaluations,
                          double tolerance = 1e-7);

} // namespace nugap::detail

#endif // NUGAP_NELDER_MEAD_HPP
