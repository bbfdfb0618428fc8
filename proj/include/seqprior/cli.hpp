#ifndef SEQPRIOR_CLI_HPP_
#define SEQPRIOR_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace seqprior {

// Full command-line surface. Returns the process exit status: 0 on success,
// 2 for configuration/usage errors, 3 for numeric failures.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// In-process convenience used by the tests.
int cli_run(const std::vector<std::string>& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr);

}  // namespace seqprior

#endif  // SEQPRIOR_CLI_HPP_
