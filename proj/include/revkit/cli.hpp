// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace revkit {

// Entry point for the revkit command-line tool. Returns the process exit
// code: 0 success, 1 runtime failure, 2 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace revkit
