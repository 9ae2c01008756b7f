#include <ptm/metrics.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace ptm;

namespace {

// A thousand dictionary words is enough to exercise the scan without paying
// for the full index on every run.
struct World {
    phonetics::PronunciationTable table = phonetics::load_dictionary(PTM_BENCH_DICT).table;
    VocabIndex index;
    std::vector<std::string> words;

    World()
    {
        const auto sorted = table.sorted_words();
        std::mt19937_64 rng(5);
        phonetics::PronunciationTable sample;
        for (int i = 0; i < 1000; ++i) {
            const auto w = sorted[rng() % sorted.size()];
            sample.insert(std::string(w), *table.find(w));
            words.emplace_back(w);
        }
        index = VocabIndex::build(sample, VocabIndex::default_symbols(), 1);
    }
};

World& world()
{
    static World w;
    return w;
}

ForceVector unit_force(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.0F, 1.0F);
    ForceVector v;
    float n2 = 0;
    for (auto& x : v.coords) {
        x = u(rng);
        n2 += x * x;
    }
    for (auto& x : v.coords) x /= std::sqrt(n2);
    return v;
}

void BM_Evolve(benchmark::State& state)
{
    const auto r = RotationOperator::standard();
    const auto v = unit_force(1);
    TorusState s;
    for (auto _ : state) {
        s = evolve(r, s, v);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_Evolve);

void BM_EvolveDouble(benchmark::State& state)
{
    const auto r = RotationOperator::standard();
    ForceVectorF64 v;
    const auto f = unit_force(1);
    for (std::size_t i = 0; i < kDim; ++i) v.coords[i] = f[i];
    TorusStateF64 s;
    for (auto _ : state) {
        s = evolve(r, s, v);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_EvolveDouble);

void BM_InvertStep(benchmark::State& state)
{
    const auto r = RotationOperator::standard();
    const TorusState prev = evolve(r, TorusState{}, unit_force(2));
    const TorusState cur = evolve(r, prev, unit_force(3));
    for (auto _ : state) benchmark::DoNotOptimize(invert_step(r, cur, prev));
}
BENCHMARK(BM_InvertStep);

void BM_FingerprintWord(benchmark::State& state)
{
    auto& w = world();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(phonetics::fingerprint_token(w.words[i++ % w.words.size()], w.table));
    }
}
BENCHMARK(BM_FingerprintWord);

void BM_Nearest(benchmark::State& state)
{
    auto& w = world();
    const auto probe = unit_force(4);
    for (auto _ : state) benchmark::DoNotOptimize(w.index.nearest(probe, static_cast<std::size_t>(state.range(0))));
    state.SetLabel(std::to_string(w.index.size()) + " entries");
}
BENCHMARK(BM_Nearest)->Arg(1)->Arg(32);

// Decode cost at increasing depth into the same trace: should stay flat.
void BM_DecodeBridge(benchmark::State& state)
{
    auto& w = world();
    static const MemoryTrace trace = [&] {
        std::vector<std::string> tokens;
        std::mt19937_64 rng(6);
        for (int i = 0; i < 10'000; ++i) tokens.push_back(w.words[rng() % w.words.size()]);
        phonetics::FingerprintCache cache(w.table);
        return encode(tokens, {}, RotationOperator::standard(), cache).trace;
    }();
    const UniformPrior prior;
    const Decoder decoder(trace, w.index, prior, {});
    const auto t = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(decoder.decode_bridge(t, {}));
}
BENCHMARK(BM_DecodeBridge)->Arg(10)->Arg(1000)->Arg(10'000);

} // namespace

BENCHMARK_MAIN();
