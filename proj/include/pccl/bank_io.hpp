#pragma once

#include <filesystem>
#include <optional>

#include "pccl/memory.hpp"

namespace pccl {

// Bank file ("CLMB"), little-endian:
//   magic u32 = 0x434C4D42, version u16 = 1, dim u32, memory_size u32, num_banks u32
//   num_banks x { task_index u32, name_len u16, name utf8, num_vectors u64,
//                 num_vectors*dim f32 }

inline constexpr std::uint32_t kBankMagic = 0x434C4D42;
inline constexpr std::uint16_t kBankVersion = 1;

void save_banks(const MemoryBankSet& set, const std::filesystem::path& path);

/// When `expected_dim` is given, a file with a different dim is rejected with
/// FormatError(dim_mismatch).
MemoryBankSet load_banks(const std::filesystem::path& path,
                         std::optional<std::size_t> expected_dim = std::nullopt);

} // namespace pccl
