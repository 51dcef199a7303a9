// Copyright Contributors to the afgs project
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

int main(int argc, char **argv) { return afgs::cli::run(argc, argv); }
