#include "pccl/memory.hpp"

#include <string>

#include "pccl/coreset.hpp"
#include "pccl/errors.hpp"

namespace pccl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

PatchMatrix subsample(const PatchMatrix& vectors, std::size_t quota, std::uint64_t seed) {
  if (vectors.rows() <= quota) return vectors;
  const auto idx = coreset_subsample(vectors, {.target_size = quota, .seed = seed, .projection_dim = std::nullopt});
  return vectors.select(idx);
}

} // namespace

MemoryBankSet::MemoryBankSet(std::size_t memory_size, std::size_t dim)
    : memory_size_(memory_size), dim_(dim) {
  if (memory_size == 0) throw InvalidArgument("memory_size must be positive");
  if (dim == 0) throw InvalidArgument("bank dim must be positive");
}

std::size_t MemoryBankSet::total_vectors() const noexcept {
  std::size_t total = 0;
  for (const auto& b : banks_) total += b.size();
  return total;
}

void MemoryBankSet::push_back(MemoryBank bank) {
  if (bank.vectors.dim() != dim_)
    throw InvalidArgument("bank dim " + std::to_string(bank.vectors.dim()) +
                          " does not match set dim " + std::to_string(dim_));
  banks_.push_back(std::move(bank));
}

std::size_t bank_quota(std::size_t memory_size, std::size_t task_index) {
  return memory_size / (task_index + 1);
}

std::uint64_t update_seed(std::uint64_t seed, std::size_t task_index, std::size_t bank_index) {
  return splitmix64(splitmix64(seed ^ (std::uint64_t{task_index} << 32)) ^ bank_index);
}

MemoryBankSet continual_update(const MemoryBankSet& set, const PatchMatrix& new_patches,
                               std::size_t task_index, const std::string& task_name,
                               std::uint64_t seed) {
  if (task_index != set.banks().size())
    throw InvalidArgument("out-of-order task: expected index " + std::to_string(set.banks().size()) +
                          ", got " + std::to_string(task_index));
  if (new_patches.empty()) throw InvalidArgument("task " + task_name + " supplied no patches");
  if (new_patches.dim() != set.dim())
    throw InvalidArgument("task " + task_name + " has dim " + std::to_string(new_patches.dim()) +
                          ", banks have dim " + std::to_string(set.dim()));
  const std::size_t quota = bank_quota(set.memory_size(), task_index);
  if (quota == 0)
    throw InvalidArgument("memory_size " + std::to_string(set.memory_size()) +
                          " leaves no room for task " + std::to_string(task_index));

  MemoryBankSet next(set.memory_size(), set.dim());
  for (std::size_t j = 0; j < set.banks().size(); ++j) {
    const auto& old = set.banks()[j];
    next.push_back({old.task_index, old.task_name,
                    subsample(old.vectors, quota, update_seed(seed, task_index, j))});
  }
  next.push_back({static_cast<std::uint32_t>(task_index), task_name,
                  subsample(new_patches, quota, update_seed(seed, task_index, task_index))});
  return next;
}

MemoryBank build_single_bank(const PatchMatrix& patches, std::size_t budget, std::uint64_t seed,
                             std::uint32_t task_index, std::string task_name) {
  if (patches.empty()) throw InvalidArgument("cannot build a bank from no patches");
  if (budget == 0) throw InvalidArgument("bank budget must be positive");
  return {task_index, std::move(task_name), subsample(patches, budget, seed)};
}

} // namespace pccl
