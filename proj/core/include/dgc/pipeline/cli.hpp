#pragma once

namespace dgc::pipeline {

// Entry point of the dgc executable. Returns the process exit code:
// 0 success, 1 usage error, 2 data error, 3 numerical failure.
int run_cli(int argc, char** argv);

}  // namespace dgc::pipeline
