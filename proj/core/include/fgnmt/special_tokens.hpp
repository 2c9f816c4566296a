#pragma once

#include <cstddef>
#include <string_view>

namespace fgnmt {

// Reserved ids shared by every vocabulary and checkpoint.
inline constexpr std::size_t kEosId = 0;
inline constexpr std::size_t kBosId = 1;
inline constexpr std::size_t kUnkId = 2;
inline constexpr std::size_t kReservedIds = 3;

inline constexpr std::string_view kEosToken = "<eos>";
inline constexpr std::string_view kBosToken = "<bos>";
inline constexpr std::string_view kUnkToken = "<unk>";

}  // namespace fgnmt
