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
#include "nelder_mead.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace nugap::detail {

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd start,
                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int max_evaluations,
                          double tolerance) {
    const Eigen::Index n = start.size();
    auto project = [&](Eigen::VectorXd x) { return x.cwiseMax(lo).cwiseMin(hi).eval(); };
    int evaluations = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evaluations;
        return f(x);
    };

    std::vector<Eigen::VectorXd> simplex;
    std::vector<double> values;
    simplex.push_back(project(start));
    values.push_back(eval(simplex[0]));
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd v = simplex[0];
        const double step = 0.1 * (hi(i) - lo(i));
        v(i) = (v(i) + step <= hi(i)) ? v(i) + step : v(i) - step;
        simplex.push_back(project(v));
        values.push_back(eval(simplex.back()));
    }

    std::vector<std::size_t> order(simplex.size());
    while (evaluations < max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[order.size() - 2];
        if (std::abs(values[worst] - values[best]) <= tolerance * (1.0 + std::abs(values[best]))) {
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i != worst) {
                centroid += simplex[i];
            }
        }
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd reflected = project(centroid + (centroid - simplex[worst]));
        const double fr = eval(reflected);
        if (fr < values[best]) {
            const Eigen::VectorXd expanded = project(centroid + 2.0 * (centroid - simplex[worst]));
            const double fe = eval(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        const Eigen::VectorXd contracted = outside ? project(centroid + 0.5 * (reflected - centroid))
                                                   : project(centroid + 0.5 * (simplex[worst] - centroid));
        const double fc = eval(contracted);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i != best) {
                simplex[i] = project(simplex[best] + 0.5 * (simplex[i] - simplex[best]));
                values[i] = eval(simplex[i]);
            }
        }
    }

    const auto it = std::min_element(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(std::distance(values.begin(), it));
    return {simplex[idx], *it, evaluations};
}

} // namespace nugap::detail
