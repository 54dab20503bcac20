// include/lidwb/harness/cli.h

// Copyright 2026 The lidwb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LIDWB_HARNESS_CLI_H_
#define LIDWB_HARNESS_CLI_H_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace lidwb::harness {

/// Entry point of lidwb-cli. Returns the process exit status.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Square matrix from a delimited text file (tabs, commas or spaces).
/// Non-numeric leading cells and header rows are skipped; reading stops at
/// the first blank line after data.
std::vector<std::vector<double>> ReadDelimitedMatrix(const std::string& path);

/// Partner plan from a 7x7 (A1..A7) or 8x8 (A0..A7) divergence matrix.
std::map<int, int> CascadePlanFromMatrix(const std::vector<std::vector<double>>& m);

}  // namespace lidwb::harness

#endif  // LIDWB_HARNESS_CLI_H_
