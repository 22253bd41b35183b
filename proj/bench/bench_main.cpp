// Compares the serial reference implementations of the sweep kernels
// against their OpenMP variants on fixed workloads and reports speedups.
// The two paths must produce identical results; a mismatch is a hard error.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "uext/modal.hpp"
#include "uext/structure.hpp"
#include "uext/ultrafilter.hpp"

using namespace uext;

namespace {

double time_ms(const std::function<void()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

int exit_code = 0;

void row(const std::string& name, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-34s %10.1f ms %10.1f ms   x%.2f   %s\n", name.c_str(), serial_ms, parallel_ms,
                serial_ms / parallel_ms, equal ? "results equal" : "RESULTS DIFFER");
    if (!equal) exit_code = 1;
}

Structure dense_frame() {
    Structure s;
    for (int i = 0; i < 5; ++i) s.add_node(std::string(1, static_cast<char>('a' + i)));
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            if ((i * 3 + j) % 4 != 1) s.add_edge(i, j);
    return s;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("hardware threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel rows run the serial path\n");
#endif
    std::printf("%-34s %13s %13s %7s\n", "kernel", "serial", "parallel", "speedup");

    {
        // Frame validity: 2^20 valuations of a four-variable formula that is
        // valid on the frame, so neither path can exit early.
        Structure s = dense_frame();
        auto f = modal::parse_modal(
            "p1 & [](p1 -> p2) & [](p2 -> p3) & <>~p4 -> (p1 & <>(p2 & p3 | p4 | ~p4))");
        modal::Verdict vs, vp;
        double ts = time_ms([&] { vs = modal::frame_valid(s, f, {24, 1}); });
        double tp = time_ms([&] { vp = modal::frame_valid(s, f, {24, 0}); });
        bool equal = vs.kind == vp.kind && vs.node == vp.node && vs.valuation == vp.valuation;
        row("frame validity sweep", ts, tp, equal && vs.valid());
    }
    {
        // Local correspondence over every frame with up to 4 nodes.
        modal::CorrespondenceOptions serial, parallel;
        serial.exhaustive_max_nodes = parallel.exhaustive_max_nodes = 4;
        serial.threads = 1;
        parallel.threads = 0;
        modal::CorrespondenceReport rs, rp;
        double ts = time_ms(
            [&] { rs = modal::correspondence_test(modal::phi_formula(), modal::star_star_condition, serial); });
        double tp = time_ms(
            [&] { rp = modal::correspondence_test(modal::phi_formula(), modal::star_star_condition, parallel); });
        row("correspondence sweep (<= 4 nodes)", ts, tp,
            rs.violations_total == rp.violations_total && rs.frames_checked == rp.frames_checked);
    }
    {
        // Definitional agreement over all 4-node relations.
        uf::SweepResult rs, rp;
        double ts = time_ms([&] { rs = uf::ue_agreement_sweep(4, 0, std::uint64_t{1} << 16, 1); });
        double tp = time_ms([&] { rp = uf::ue_agreement_sweep(4, 0, std::uint64_t{1} << 16, 0); });
        row("extension agreement sweep", ts, tp,
            rs.failures == rp.failures && rs.instances == rp.instances);
    }
    {
        // Reflexivity law over a slice of the 5-node relations.
        uf::SweepResult rs, rp;
        double ts = time_ms([&] { rs = uf::ue_reflexivity_sweep(5, 0, std::uint64_t{1} << 22, 1); });
        double tp = time_ms([&] { rp = uf::ue_reflexivity_sweep(5, 0, std::uint64_t{1} << 22, 0); });
        row("reflexivity law sweep", ts, tp,
            rs.failures == rp.failures && rs.instances == rp.instances);
    }
    return exit_code;
}
