#include "vmm/simulate.hpp"

namespace vmm {

Metrics run_trace(const Trace& trace, PageAllocator& alloc, Hierarchy& hierarchy,
                  const AccessObserver& observer) {
  const AddressMapping& m = hierarchy.mapping();
  const std::uint64_t offset_mask = m.page_bytes() - 1;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const TraceRecord& rec = trace.records[i];
    try {
      const PageFrame frame = alloc.touch(rec.app, rec.vaddr >> m.page_offset_bits);
      const PhysAddr paddr{m.frame_base(frame).value | (rec.vaddr & offset_mask)};
      const AccessOutcome outcome = hierarchy.access(rec.core, rec.app, paddr);
      if (observer) observer(AccessEvent{i, rec, frame, paddr, outcome});
    } catch (const SimulationError&) {
      throw;
    } catch (const std::exception& e) {
      throw SimulationError(i, e.what());
    }
  }
  Metrics out = hierarchy.metrics();
  if (out.per_app.size() < trace.apps.size()) out.per_app.resize(trace.apps.size());
  return out;
}

}  // namespace vmm
