#ifndef ORDQR_VERSION_HPP
#define ORDQR_VERSION_HPP

namespace ordqr {
inline constexpr const char* kVersion = "0.1.0";
}

#endif  // ORDQR_VERSION_HPP
