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
#ifndef NUGAP_APP_CLI_HPP
#define NUGAP_APP_CLI_HPP

#include <string>
#include <vector>

namespace nugap::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args);
int main(int argc, char** argv);

} // namespace nugap::app

#endif // NUGAP_APP_CLI_HPP
