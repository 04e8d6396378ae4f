#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "attsim/crypto.hpp"
#include "attsim/machine.hpp"

namespace attsim {

// Verifier-issued 16-byte challenge; a strictly increasing counter occupies
// the first 8 bytes so each challenge doubles as the verifier's clock.
struct Challenge {
  std::array<std::uint8_t, 16> bytes{};

  std::uint64_t counter() const;
  static Challenge make(std::uint64_t counter,
                        std::span<const std::uint8_t> rand8);
  bool operator==(const Challenge&) const = default;
};

enum class AttMode : std::uint8_t { FullPmem = 0, LmtOnly = 1, Pox = 2 };

struct AttScope {
  AttMode mode = AttMode::FullPmem;
  bool includes_exec = false;
  std::vector<std::pair<Address, std::uint16_t>> regions;  // (start, byte len)

  std::uint32_t total_words() const;
  static AttScope for_mode(AttMode mode, const MemoryMap& map,
                           const ApexBounds& bounds);
  bool operator==(const AttScope&) const = default;
};

struct AttReport {
  std::array<std::uint8_t, 32> mac{};
  bool exec = false;
  std::array<std::uint8_t, 16> lmt{};
  std::vector<std::uint8_t> or_bytes;  // OR slice for pox scopes
  AttScope scope;
};

// Cost model of the attestation stub: a fixed setup/MAC cost plus a
// per-attested-word sweep cost.
inline constexpr std::uint32_t kIefFixedCycles = 2000;
inline constexpr std::uint32_t kIefCyclesPerWord = 4;

// Unambiguous MAC input: every variable-length field is length-prefixed and
// region bounds are part of the scope header, so distinct inputs yield
// distinct encodings.
std::vector<std::uint8_t> canonical_encode(
    const Challenge& chal, const AttScope& scope, bool exec,
    const std::array<std::uint8_t, 16>& lmt,
    const std::vector<std::vector<std::uint8_t>>& region_bytes);

struct IefOutcome {
  bool aborted = false;  // a monitor vetoed the sweep; machine was reset
  AttReport report;
  std::uint64_t cycles_spent = 0;
};

// Runs the attestation stub: enters at the stub entry point, sweeps the
// scoped regions with one observable read per word, computes the MAC and
// emits it through the report port, then leaves via the stub exit. The
// challenge must already be in the challenge region.
IefOutcome ief_run(Machine& m, const Challenge& chal, const AttScope& scope);

}  // namespace attsim
