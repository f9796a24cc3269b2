#pragma once

#include <string>
#include <string_view>

namespace specdegen {

enum class Boundary { Dirichlet, Neumann };

Boundary parse_boundary(std::string_view s);
const char* to_string(Boundary b);

}  // namespace specdegen
