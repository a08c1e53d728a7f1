// Copyright 2026 The Anatomy-kNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Builds the 6-column census income CSV from the raw UCI files.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "anatomy/adult.hpp"
#include "anatomy/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Prepare the census income dataset"};
  std::vector<std::string> inputs;
  std::string output;
  app.add_option("inputs", inputs, "Raw files (adult.data, adult.test)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("-o,--out", output, "Output CSV")->required();
  CLI11_PARSE(app, argc, argv);

  std::ofstream out(output, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << output << '\n';
    return 2;
  }
  anatomy::AdultPrepStats total;
  try {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      std::ifstream in(inputs[i]);
      auto stats = anatomy::prepare_adult(in, out, i == 0);
      total.read += stats.read;
      total.kept += stats.kept;
      total.dropped_missing += stats.dropped_missing;
    }
  } catch (const anatomy::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cout << "read " << total.read << ", kept " << total.kept << ", dropped (missing) "
            << total.dropped_missing << '\n';
  return 0;
}
