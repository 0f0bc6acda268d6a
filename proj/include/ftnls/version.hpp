#pragma once

namespace ftnls {

inline constexpr const char* version = "0.1.0";

}  // namespace ftnls
