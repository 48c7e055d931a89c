#include "pccl/bank_io.hpp"

#include <limits>
#include <string>

#include "binary_io.hpp"
#include "pccl/errors.hpp"

namespace pccl {

void save_banks(const MemoryBankSet& set, const std::filesystem::path& path) {
  if (set.memory_size() > std::numeric_limits<std::uint32_t>::max())
    throw InvalidArgument("memory_size does not fit the bank file header");
  detail::ByteWriter w;
  w.put(kBankMagic);
  w.put(kBankVersion);
  w.put(static_cast<std::uint32_t>(set.dim()));
  w.put(static_cast<std::uint32_t>(set.memory_size()));
  w.put(static_cast<std::uint32_t>(set.banks().size()));
  for (const auto& b : set.banks()) {
    if (b.task_name.size() > std::numeric_limits<std::uint16_t>::max())
      throw InvalidArgument("task name too long for the bank file");
    w.put(b.task_index);
    w.put(static_cast<std::uint16_t>(b.task_name.size()));
    w.put_bytes({reinterpret_cast<const std::uint8_t*>(b.task_name.data()), b.task_name.size()});
    w.put(static_cast<std::uint64_t>(b.size()));
    w.put_f32s(b.vectors.values());
  }
  detail::write_file_bytes(path, w.bytes());
}

MemoryBankSet load_banks(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
  const auto bytes = detail::read_file_bytes(path);
  detail::ByteReader r(bytes, path.string());

  if (r.get<std::uint32_t>() != kBankMagic)
    throw FormatError(FormatError::Kind::bad_magic, path.string() + ": not a CLMB bank file");
  if (const auto v = r.get<std::uint16_t>(); v != kBankVersion)
    throw FormatError(FormatError::Kind::version_mismatch,
                      path.string() + ": unsupported CLMB version " + std::to_string(v));

  const auto dim = r.get<std::uint32_t>();
  const auto memory_size = r.get<std::uint32_t>();
  const auto num_banks = r.get<std::uint32_t>();
  if (expected_dim && *expected_dim != dim)
    throw FormatError(FormatError::Kind::dim_mismatch,
                      path.string() + ": bank dim " + std::to_string(dim) + ", expected " +
                          std::to_string(*expected_dim));
  if (dim == 0 || memory_size == 0)
    throw FormatError(FormatError::Kind::corrupt, path.string() + ": zero dim or memory_size");

  MemoryBankSet set(memory_size, dim);
  for (std::uint32_t b = 0; b < num_banks; ++b) {
    MemoryBank bank;
    bank.task_index = r.get<std::uint32_t>();
    const auto name_len = r.get<std::uint16_t>();
    bank.task_name.resize(name_len);
    r.get_bytes({reinterpret_cast<std::uint8_t*>(bank.task_name.data()), name_len});
    const auto n = r.get<std::uint64_t>();
    if (n > r.remaining() / (sizeof(float) * dim))
      throw FormatError(FormatError::Kind::truncated, path.string() + ": truncated bank payload");
    std::vector<float> values(n * dim);
    r.get_f32s(values);
    try {
      bank.vectors = PatchMatrix(dim, std::move(values));
    } catch (const InvalidArgument& e) {
      throw FormatError(FormatError::Kind::corrupt, path.string() + ": " + e.what());
    }
    set.push_back(std::move(bank));
  }
  return set;
}

} // namespace pccl
