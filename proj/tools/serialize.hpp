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
#ifndef NUGAP_APP_SERIALIZE_HPP
#define NUGAP_APP_SERIALIZE_HPP

#include <json.hpp>

#include "nugap/bo_select.hpp"
#include "nugap/transfer.hpp"

namespace nugap::app {

nlohmann::json to_json(const Hyperparams& hp);
Hyperparams hyperparams_from_json(const nlohmann::json& j);

/// Everything except the fitted models, which are rebuilt from samples and hyperparameters.
nlohmann::json to_json(const SelectionResult& r);
SelectionResult selection_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StudyReport& r);
StudyReport study_from_json(const nlohmann::json& j);

} // namespace nugap::app

#endif // NUGAP_APP_SERIALIZE_HPP
