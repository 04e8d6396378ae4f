#include "attsim/ief.hpp"

namespace attsim {

std::uint64_t Challenge::counter() const {
  std::uint64_t c = 0;
  for (int i = 0; i < 8; ++i) c |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return c;
}

Challenge Challenge::make(std::uint64_t counter,
                          std::span<const std::uint8_t> rand8) {
  Challenge c;
  for (int i = 0; i < 8; ++i)
    c.bytes[i] = static_cast<std::uint8_t>(counter >> (8 * i));
  for (int i = 0; i < 8 && i < static_cast<int>(rand8.size()); ++i)
    c.bytes[8 + i] = rand8[i];
  return c;
}

std::uint32_t AttScope::total_words() const {
  std::uint32_t w = 0;
  for (const auto& [start, len] : regions) {
    (void)start;
    w += (len + 1u) / 2u;
  }
  return w;
}

AttScope AttScope::for_mode(AttMode mode, const MemoryMap& map,
                            const ApexBounds& b) {
  AttScope s;
  s.mode = mode;
  switch (mode) {
    case AttMode::FullPmem:
      s.includes_exec = false;
      s.regions = {{map.pmem.start, static_cast<std::uint16_t>(map.pmem.len)}};
      break;
    case AttMode::LmtOnly:
      s.includes_exec = false;
      s.regions = {{map.lmt.start, 16}};
      break;
    case AttMode::Pox: {
      s.includes_exec = true;
      // ER byte window extends past er_max to cover the final instruction.
      const auto er_len =
          static_cast<std::uint16_t>(b.er_max + 4 - b.er_min);
      const auto or_len = static_cast<std::uint16_t>(b.or_max - b.or_min);
      s.regions = {{map.metadata.start, 8},
                   {b.er_min, er_len},
                   {b.or_min, or_len}};
      break;
    }
  }
  return s;
}

std::vector<std::uint8_t> canonical_encode(
    const Challenge& chal, const AttScope& scope, bool exec,
    const std::array<std::uint8_t, 16>& lmt,
    const std::vector<std::vector<std::uint8_t>>& region_bytes) {
  std::vector<std::uint8_t> out;
  auto u16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  out.insert(out.end(), chal.bytes.begin(), chal.bytes.end());
  out.push_back(static_cast<std::uint8_t>(scope.mode));
  out.push_back(scope.includes_exec ? 1 : 0);
  u16(static_cast<std::uint16_t>(scope.regions.size()));
  for (const auto& [start, len] : scope.regions) {
    u16(start);
    u16(len);
  }
  out.push_back(exec ? 1 : 0);
  out.insert(out.end(), lmt.begin(), lmt.end());
  for (const auto& bytes : region_bytes) {
    u16(static_cast<std::uint16_t>(bytes.size()));
    out.insert(out.end(), bytes.begin(), bytes.end());
  }
  return out;
}

namespace {

// One bus slot of the sweep. Fails (and leaves the machine reset) when a
// monitor vetoes; pending DMA claims the slot first and is itself vetoed
// while the stub runs.
bool sweep_slot(Machine& m, Address pc, std::optional<MemAccess> access) {
  m.apply_due_actions();
  while (m.st.dma.active) {
    m.poke_pc(pc);
    auto r = m.step();
    if (r.reset) return false;
  }
  m.poke_pc(pc);
  BusSignals sig;
  sig.pc = pc;
  if (access) sig.accesses.push_back(*access);
  sig.irq = m.st.irq_pending;
  return m.offer_ief_signal(sig);
}

bool sweep_reads(Machine& m, Address pc, Address start, std::uint32_t len,
                 std::uint32_t cycles_per_word) {
  for (std::uint32_t i = 0; i < len; i += 2) {
    const auto a = static_cast<Address>(start + i);
    if (!sweep_slot(m, pc,
                    MemAccess{a, MemAccess::Kind::Read, MemAccess::Agent::Core}))
      return false;
    m.add_cycles(cycles_per_word);
  }
  return true;
}

}  // namespace

IefOutcome ief_run(Machine& m, const Challenge& chal, const AttScope& scope) {
  IefOutcome out;
  const MemoryMap& map = m.map();
  const Address saved_pc = m.st.pc();
  const std::uint64_t start_cycles = m.st.cycles;
  m.in_protected_run = true;

  auto abort = [&]() {
    m.in_protected_run = false;
    out.aborted = true;
    out.cycles_spent = m.st.cycles - start_cycles;
    return out;
  };

  // Entry: the monitors watch the stub being entered at its first address.
  if (!sweep_slot(m, map.swatt_entry, std::nullopt)) return abort();
  m.add_cycles(kIefFixedCycles);

  // Key, challenge and LMT reads are part of the fixed cost.
  if (!sweep_reads(m, map.swatt_body, map.k_region.start, 32, 0))
    return abort();
  if (!sweep_reads(m, map.swatt_body, map.chal.start, 16, 0)) return abort();
  if (!sweep_reads(m, map.swatt_body, map.lmt.start, 16, 0)) return abort();

  // The scoped sweep: one observable read per attested word.
  for (const auto& [start, len] : scope.regions) {
    if (!sweep_reads(m, map.swatt_body, start, len, kIefCyclesPerWord))
      return abort();
  }

  // Assemble the report host-side; values cannot have changed mid-sweep
  // because every mutation path is either vetoed or deferred.
  AttReport rep;
  rep.scope = scope;
  rep.exec = m.bank.apex_on && m.bank.apex.exec;
  rep.lmt = m.bank.rata.lmt;
  std::vector<std::vector<std::uint8_t>> region_bytes;
  for (const auto& [start, len] : scope.regions)
    region_bytes.push_back(m.peek_range(start, len));
  if (scope.mode == AttMode::Pox) {
    const auto b = m.make_ctx().bounds;
    rep.or_bytes = m.peek_range(b.or_min,
                                static_cast<std::uint32_t>(b.or_max) - b.or_min);
  }
  const auto key = m.key_bytes();
  const auto mac_input =
      canonical_encode(chal, scope, rep.exec, rep.lmt, region_bytes);
  rep.mac = hmac_sha256(key, mac_input);

  // The stub pushes the MAC out through the report port.
  for (int i = 0; i < 32; i += 2) {
    if (!sweep_slot(m, map.swatt_body,
                    MemAccess{map.report_port, MemAccess::Kind::Write,
                              MemAccess::Agent::Core}))
      return abort();
  }
  m.io.report.assign(rep.mac.begin(), rep.mac.end());

  // Exit from the stub's last instruction, then return to the caller.
  if (!sweep_slot(m, map.swatt_exit, std::nullopt)) return abort();
  m.poke_pc(saved_pc);

  m.in_protected_run = false;
  out.report = std::move(rep);
  out.cycles_spent = m.st.cycles - start_cycles;
  return out;
}

}  // namespace attsim
