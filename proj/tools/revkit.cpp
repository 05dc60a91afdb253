// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/cli.hpp"

int main(int argc, char** argv) { return revkit::run_cli(argc, argv); }
