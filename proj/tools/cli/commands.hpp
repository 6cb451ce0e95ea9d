#pragma once

#include <ostream>

namespace agrag::cli {

// Entry point shared by the agrag executable and in-process tests.
// Exit status: 0 success, 1 runtime failure (stage named on err), 2 usage error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace agrag::cli
