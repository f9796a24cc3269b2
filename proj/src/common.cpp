#include "specdegen/common.hpp"

#include "specdegen/errors.hpp"

namespace specdegen {

Boundary parse_boundary(std::string_view s) {
    if (s == "dirichlet" || s == "D") return Boundary::Dirichlet;
    if (s == "neumann" || s == "N") return Boundary::Neumann;
    throw ValidationError("unknown boundary condition '" + std::string(s) + "' (dirichlet|neumann)");
}

const char* to_string(Boundary b) { return b == Boundary::Dirichlet ? "dirichlet" : "neumann"; }

}  // namespace specdegen
