#include "clqr/version.hpp"

namespace clqr {

const char* version() { return CLQR_VERSION; }

}  // namespace clqr
