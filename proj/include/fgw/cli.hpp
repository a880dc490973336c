#pragma once
// Command-line front end: synth / match / eval / oracle. run() is the whole
// program behind main(), exposed so tests can drive commands in-process.
// Exit codes: 0 success (warnings included), 1 I/O failure, 2 usage or
// validation error.

#include <ostream>
#include <string>
#include <vector>

namespace fgw::cli {

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace fgw::cli
