#include "specdegen/errors.hpp"

namespace specdegen {

void fail_validation(const std::string& what) { throw ValidationError(what); }

}  // namespace specdegen
