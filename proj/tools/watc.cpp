// SPDX-License-Identifier: Apache-2.0
#include "watc/cli.hpp"

int main(int argc, char** argv) { return watc::cli::run(argc, argv); }
