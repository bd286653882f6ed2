#pragma once

namespace iclforge::pipeline {

// Parses the command line, merges defaults < config file < environment <
// flags and runs the selected subcommand. Returns the process exit status.
int RunCli(int argc, char** argv);

}  // namespace iclforge::pipeline
