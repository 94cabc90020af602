#pragma once

#include "star/star_memory.hpp"
#include "star/types.hpp"

#include <array>
#include <cstdint>

namespace star {

enum class Bank { kSpatial = 0, kTemporal = 1, kAbstract = 2, kRetrieved = 3 };

inline const char* bank_name(Bank b) {
  switch (b) {
    case Bank::kSpatial: return "spatial";
    case Bank::kTemporal: return "temporal";
    case Bank::kAbstract: return "abstract";
    case Bank::kRetrieved: return "retrieved";
  }
  return "unknown";
}

struct BankRange {
  std::size_t start = 0;
  std::size_t length = 0;
};

// Immutable, versioned concatenation of the banks in S, T, A, R order.
struct MemorySnapshot {
  std::uint64_t version = 0;
  std::uint64_t timestamp_frame = 0;
  TokenMatrixd tokens;  // one D-dimensional token per row
  std::array<BankRange, 4> banks{};
  std::uint64_t checksum = 0;

  std::size_t token_count() const { return static_cast<std::size_t>(tokens.rows()); }
  const BankRange& range(Bank b) const { return banks[static_cast<int>(b)]; }
  auto bank(Bank b) const {
    const auto& r = range(b);
    return tokens.middleRows(static_cast<Eigen::Index>(r.start), static_cast<Eigen::Index>(r.length));
  }

  // True when the stored checksum matches the content.
  bool verify() const;
};

std::uint64_t snapshot_checksum(std::uint64_t version, std::uint64_t timestamp, const TokenMatrixd& tokens);

MemorySnapshot make_snapshot(const StarMemory& memory, std::uint64_t version);

}  // namespace star
