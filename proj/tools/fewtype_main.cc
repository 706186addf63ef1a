// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fewtype/cli.h"

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("fewtype"));
  spdlog::cfg::load_env_levels();
  return fewtype::RunCli(argc, argv, std::cout, std::cerr);
}
