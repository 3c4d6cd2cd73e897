// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace misobb {

// Entry point of the command line tool. Returns the process exit code:
// 0 success, 2 invalid input or unsupported request, 3 branch-and-bound
// node budget exhausted, 4 pricing iteration did not converge. Codes 3 and
// 4 still write their results.
int run_cli(int argc, const char* const* argv);

}  // namespace misobb
