#ifndef TMFM_VERSION_HPP
#define TMFM_VERSION_HPP

namespace tmfm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tmfm

#endif  // TMFM_VERSION_HPP
