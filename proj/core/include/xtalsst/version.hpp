#pragma once

namespace xtal {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace xtal
