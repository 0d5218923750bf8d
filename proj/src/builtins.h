#pragma once

#include <string_view>

namespace gadgetforge {

class Interpreter;
struct Object;

// Populates the array and string prototypes with their native methods.
void install_builtins(Interpreter& interp, Object& array_proto, Object& string_proto);

}  // namespace gadgetforge
