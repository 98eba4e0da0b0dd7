// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <iostream>

#include "tagdet/cli/commands.hpp"

int main(int argc, char** argv) { return tagdet::cli::run_cli(argc, argv, std::cout, std::cerr); }
