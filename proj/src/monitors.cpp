#include "attsim/monitors.hpp"

#include <algorithm>

namespace attsim {

const char* violation_name(Violation v) {
  switch (v) {
    case Violation::KeyAccess:
      return "KeyAccess";
    case Violation::SwAttInterrupt:
      return "SwAttInterrupt";
    case Violation::SwAttNonAtomicEntryOrExit:
      return "SwAttNonAtomicEntryOrExit";
    case Violation::LmtWrite:
      return "LmtWrite";
    case Violation::DmaDuringProtected:
      return "DmaDuringProtected";
  }
  return "?";
}

VrasedResult vrased_check(const BusSignals& sig, const VrasedState& st,
                          const VrasedConfig& cfg) {
  VrasedResult r;
  const bool now_in = cfg.swatt.contains(sig.pc);

  for (const auto& a : sig.accesses) {
    const bool in_key = cfg.k_region.contains(a.addr) ||
                        cfg.k_region.contains(static_cast<Address>(a.addr + 1));
    if (in_key && (a.agent == MemAccess::Agent::Dma || !now_in))
      r.violations.push_back(Violation::KeyAccess);
    if (a.agent == MemAccess::Agent::Dma && now_in)
      r.violations.push_back(Violation::DmaDuringProtected);
  }
  // Executing out of the key region leaks it through the fetch path; the
  // fetch window is up to 4 bytes wide.
  if (cfg.k_region.overlaps(sig.pc, 4))
    r.violations.push_back(Violation::KeyAccess);

  if (sig.irq && now_in) r.violations.push_back(Violation::SwAttInterrupt);

  if (!st.in_swatt && now_in && sig.pc != cfg.entry)
    r.violations.push_back(Violation::SwAttNonAtomicEntryOrExit);
  if (st.in_swatt && !now_in && st.last_pc != cfg.exit)
    r.violations.push_back(Violation::SwAttNonAtomicEntryOrExit);

  r.next.in_swatt = now_in;
  r.next.last_pc = sig.pc;
  return r;
}

RataResult rata_update(const BusSignals& sig, const RataState& st,
                       const MonitorContext& ctx, const MemoryMap& map,
                       Address swatt_entry) {
  RataResult r;
  r.next = st;

  for (const auto& a : sig.accesses) {
    if (a.kind == MemAccess::Kind::Write &&
        (map.lmt.contains(a.addr) ||
         map.lmt.contains(static_cast<Address>(a.addr + 1)))) {
      r.violation = Violation::LmtWrite;
    }
  }

  if (sig.pmem_write) {
    if (st.variant == RataVariant::A) {
      // Timestamp of the modification, zero-padded to the report width.
      const std::uint64_t t = ctx.cycles;
      r.next.lmt.fill(0);
      for (int i = 0; i < 8; ++i)
        r.next.lmt[i] = static_cast<std::uint8_t>((t >> (8 * i)) & 0xFF);
    } else {
      r.next.latch = true;
    }
  }

  if (st.variant == RataVariant::B && sig.pc == swatt_entry && r.next.latch) {
    r.next.lmt = ctx.chal;
    r.next.latch = false;
  }
  return r;
}

namespace {

bool write_into(const BusSignals& sig, Address lo, std::uint32_t hi_excl,
                bool dma_only = false) {
  for (const auto& a : sig.accesses) {
    if (a.kind != MemAccess::Kind::Write) continue;
    if (dma_only && a.agent != MemAccess::Agent::Dma) continue;
    if (static_cast<std::uint32_t>(a.addr) + 1 >= lo &&
        static_cast<std::uint32_t>(a.addr) < hi_excl)
      return true;
  }
  return false;
}

bool any_dma(const BusSignals& sig) {
  return std::any_of(sig.accesses.begin(), sig.accesses.end(),
                     [](const MemAccess& a) {
                       return a.agent == MemAccess::Agent::Dma;
                     });
}

}  // namespace

ApexState apex_update(const BusSignals& sig, const ApexState& st,
                      const MonitorContext& ctx, const MemoryMap& map) {
  ApexState n = st;
  n.last_pc = sig.pc;
  const ApexBounds& b = ctx.bounds;
  const bool bounds_ok = b.er_max >= b.er_min;
  // The byte window extends past er_max to cover the final instruction.
  const std::uint32_t er_end = static_cast<std::uint32_t>(b.er_max) + 4;
  const bool pc_in_er = bounds_ok && sig.pc >= b.er_min && sig.pc <= b.er_max;
  const bool was_in_er =
      bounds_ok && st.last_pc >= b.er_min && st.last_pc <= b.er_max;

  auto clear = [&](ApexClearReason why) {
    n.exec = false;
    n.phase = ApexPhase::Idle;
    n.last_clear = why;
  };

  // Writes to the metadata registers invalidate any proof state.
  if (write_into(sig, map.metadata.start, map.metadata.end())) {
    clear(ApexClearReason::MetadataWrite);
    return n;
  }
  // Writes into ER, by any agent in any phase, invalidate the proof.
  if (bounds_ok && write_into(sig, b.er_min, er_end)) {
    clear(ApexClearReason::ErWrite);
    return n;
  }

  switch (st.phase) {
    case ApexPhase::Idle:
      if (bounds_ok && sig.pc == b.er_min) {
        n.phase = ApexPhase::Executing;
        n.exec = false;
      }
      break;
    case ApexPhase::Executing:
      if (sig.irq) {
        clear(ApexClearReason::IrqInEr);
        break;
      }
      if (any_dma(sig)) {
        clear(ApexClearReason::DmaInEr);
        break;
      }
      if (!pc_in_er) {
        if (st.last_pc == b.er_max) {
          // Stepped off the last ER instruction: completed execution.
          n.phase = ApexPhase::Executed;
          n.exec = true;
        } else {
          clear(ApexClearReason::BadExit);
        }
      }
      break;
    case ApexPhase::Executed:
      if (write_into(sig, b.or_min, b.or_max)) {
        clear(ApexClearReason::OrWriteAfterExec);
        break;
      }
      if (pc_in_er) {
        if (sig.pc == b.er_min && !was_in_er) {
          // A new execution attempt supersedes the completed proof.
          n.exec = false;
          n.phase = ApexPhase::Executing;
          n.last_clear = ApexClearReason::Restarted;
        } else if (!was_in_er) {
          clear(ApexClearReason::BadEntry);
        }
      }
      break;
  }
  return n;
}

MonitorBank::StepOutcome MonitorBank::evaluate(const BusSignals& sig,
                                               const MonitorContext& ctx,
                                               const MemoryMap& map) const {
  StepOutcome o{vrased, rata, apex, {}};
  if (vrased_on) {
    auto r = vrased_check(sig, vrased, vcfg);
    o.vrased = r.next;
    o.violations = std::move(r.violations);
  }
  if (rata_on) {
    auto r = rata_update(sig, rata, ctx, map, vcfg.entry);
    o.rata = r.next;
    if (r.violation) o.violations.push_back(*r.violation);
  }
  if (apex_on) o.apex = apex_update(sig, apex, ctx, map);
  return o;
}

void MonitorBank::commit(const StepOutcome& o) {
  vrased = o.vrased;
  rata = o.rata;
  apex = o.apex;
}

void MonitorBank::on_reset() {
  vrased = VrasedState{};
  apex.exec = false;
  apex.phase = ApexPhase::Idle;
  apex.last_clear = ApexClearReason::Reset;
  // rata.lmt and rata.latch survive a reset.
}

}  // namespace attsim
