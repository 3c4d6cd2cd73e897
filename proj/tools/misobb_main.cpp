// SPDX-License-Identifier: Apache-2.0

#include "misobb/cli.hpp"

int main(int argc, char** argv) { return misobb::run_cli(argc, argv); }
