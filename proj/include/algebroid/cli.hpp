#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace algebroid::cli {

enum ExitCode { verified = 0, refuted = 1, usage = 2, inconclusive = 3 };

/// `args` excludes the program name: <command> <file.adf> [names...] [options].
/// Output is deterministic for identical input.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Same, with the definition text given directly (`file` is used in messages).
int run_text(const std::vector<std::string>& args, const std::string& file, const std::string& text,
             std::ostream& out, std::ostream& err);

}  // namespace algebroid::cli
