#include "dgc/pipeline/cli.hpp"

int main(int argc, char** argv) { return dgc::pipeline::run_cli(argc, argv); }
