#pragma once

namespace blelat {

inline constexpr const char* kVersion = "1.0.0";

}
