#pragma once

#include <string>
#include <string_view>

#include "tneb/mixture.hpp"

namespace tneb {

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

// Content hash of a model's parameters (independent of fit metadata).
std::string model_hash(const MixtureModel& m);

}  // namespace tneb
