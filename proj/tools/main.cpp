#include "iclforge/pipeline/cli.hpp"

int main(int argc, char** argv) { return iclforge::pipeline::RunCli(argc, argv); }
