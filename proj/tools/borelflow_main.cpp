// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <vector>

#include "borelflow/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return borelflow::run_command(args);
}
