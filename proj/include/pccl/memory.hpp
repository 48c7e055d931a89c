#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pccl/patch_matrix.hpp"

namespace pccl {

struct MemoryBank {
  std::uint32_t task_index = 0;
  std::string task_name;
  PatchMatrix vectors;

  std::size_t size() const noexcept { return vectors.rows(); }
  friend bool operator==(const MemoryBank&, const MemoryBank&) = default;
};

/// Ordered per-task banks sharing one global vector budget.
class MemoryBankSet {
public:
  MemoryBankSet() = default;
  MemoryBankSet(std::size_t memory_size, std::size_t dim);

  std::size_t memory_size() const noexcept { return memory_size_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<MemoryBank>& banks() const noexcept { return banks_; }
  std::size_t total_vectors() const noexcept;
  bool empty() const noexcept { return banks_.empty(); }

  /// Appends without re-subsampling; used by loaders and non-CL strategies.
  void push_back(MemoryBank bank);

  friend bool operator==(const MemoryBankSet&, const MemoryBankSet&) = default;

private:
  std::size_t memory_size_ = 0;
  std::size_t dim_ = 0;
  std::vector<MemoryBank> banks_;
};

/// Per-bank quota after task `task_index`: floor(memory_size / (task_index + 1)).
std::size_t bank_quota(std::size_t memory_size, std::size_t task_index);

/// Seed used for every coreset call made while absorbing task `task_index`.
/// Bank `bank_index == task_index` is the new bank.
std::uint64_t update_seed(std::uint64_t seed, std::size_t task_index, std::size_t bank_index);

/// One step of the continual memory-bank update.
///
/// Every existing bank is re-subsampled from its own vectors down to the new
/// quota (no-op when already within it), then the task's patches are
/// subsampled to the quota and appended as bank `task_index`. Throws
/// InvalidArgument on an out-of-order task, dim mismatch, empty patches or a
/// zero quota.
MemoryBankSet continual_update(const MemoryBankSet& set, const PatchMatrix& new_patches,
                               std::size_t task_index, const std::string& task_name,
                               std::uint64_t seed);

/// Bank of min(budget, |patches|) coreset-selected vectors.
MemoryBank build_single_bank(const PatchMatrix& patches, std::size_t budget, std::uint64_t seed,
                             std::uint32_t task_index = 0, std::string task_name = {});

} // namespace pccl
