#ifndef COPROMPT_CORE_ERROR_HPP_
#define COPROMPT_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace coprompt {

// All library failures surface as Error. `code` is a short stable slug
// ("config", "structural", "usage", "numeric", "io", "guard") that the CLI
// turns into its machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace coprompt

#endif  // COPROMPT_CORE_ERROR_HPP_
