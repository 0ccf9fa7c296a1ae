#include "dgc/error.hpp"

namespace dgc {

void throw_shape(const std::string& what) { throw ShapeError(what); }

}  // namespace dgc
