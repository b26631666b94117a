#pragma once

// Typed field access with JSON-pointer diagnostics. Private to the library.

#include <string>
#include <vector>

#include "cdef/manifest.hpp"

namespace cdef::fields {

const Json& require(const Json& j, const std::string& key, const std::string& path);
std::string get_string(const Json& j, const std::string& key, const std::string& path);
std::string optional_string(const Json& j, const std::string& key, const std::string& path, const std::string& def);
double get_double(const Json& j, const std::string& key, const std::string& path);
double optional_double(const Json& j, const std::string& key, const std::string& path, double def);
int get_int(const Json& j, const std::string& key, const std::string& path, int min = 0);
int optional_int(const Json& j, const std::string& key, const std::string& path, int def, int min = 0);
bool optional_bool(const Json& j, const std::string& key, const std::string& path, bool def);
/// expected < 0 accepts any length.
Vec vector_value(const Json& v, const std::string& path, int expected);
Vec get_vector(const Json& j, const std::string& key, const std::string& path, int expected);
std::vector<std::string> get_strings(const Json& j, const std::string& key, const std::string& path);

} // namespace cdef::fields
