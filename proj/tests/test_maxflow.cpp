#include <doctest.h>

#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <tuple>

#include "sdp/error.hpp"
#include "sdp/maxflow.hpp"

using namespace sdp;

namespace {

struct RandomGraph {
    int n;
    std::vector<double> src, snk;
    std::vector<std::tuple<int, int, double, double>> edges;
};

RandomGraph random_graph(int n, int m, std::mt19937& rng, bool integral) {
    std::uniform_real_distribution<double> cap(0.0, 10.0);
    const auto draw = [&] { return integral ? std::floor(cap(rng)) : cap(rng); };
    RandomGraph g{n, std::vector<double>(n), std::vector<double>(n), {}};
    for (int i = 0; i < n; ++i) {
        g.src[i] = rng() % 3 == 0 ? 0.0 : draw();
        g.snk[i] = rng() % 3 == 0 ? 0.0 : draw();
    }
    for (int k = 0; k < m; ++k) {
        const int i = static_cast<int>(rng() % n);
        int j = static_cast<int>(rng() % n);
        if (i == j) j = (j + 1) % n;
        g.edges.emplace_back(i, j, draw(), rng() % 2 ? draw() : 0.0);
    }
    return g;
}

double cut_value(const RandomGraph& g, const std::vector<bool>& sink_side) {
    double c = 0.0;
    for (int i = 0; i < g.n; ++i) c += sink_side[i] ? g.src[i] : g.snk[i];
    for (const auto& [i, j, f, r] : g.edges) {
        if (!sink_side[i] && sink_side[j]) c += f;
        if (sink_side[i] && !sink_side[j]) c += r;
    }
    return c;
}

double solve(const RandomGraph& g, MaxFlowGraph& mf) {
    for (int i = 0; i < g.n; ++i) mf.add_tweights(i, g.src[i], g.snk[i]);
    for (const auto& [i, j, f, r] : g.edges) mf.add_edge(i, j, f, r);
    return mf.maxflow();
}

// Edmonds-Karp on a dense capacity matrix; node n is the source, n+1 the sink.
double edmonds_karp(const RandomGraph& g) {
    const int n = g.n + 2, s = g.n, t = g.n + 1;
    std::vector<std::vector<double>> cap(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < g.n; ++i) {
        cap[s][i] += g.src[i];
        cap[i][t] += g.snk[i];
    }
    for (const auto& [i, j, f, r] : g.edges) {
        cap[i][j] += f;
        cap[j][i] += r;
    }
    double flow = 0.0;
    while (true) {
        std::vector<int> parent(n, -1);
        parent[s] = s;
        std::queue<int> q;
        q.push(s);
        while (!q.empty() && parent[t] < 0) {
            const int u = q.front();
            q.pop();
            for (int v = 0; v < n; ++v)
                if (parent[v] < 0 && cap[u][v] > 1e-12) {
                    parent[v] = u;
                    q.push(v);
                }
        }
        if (parent[t] < 0) return flow;
        double bottleneck = std::numeric_limits<double>::infinity();
        for (int v = t; v != s; v = parent[v]) bottleneck = std::min(bottleneck, cap[parent[v]][v]);
        for (int v = t; v != s; v = parent[v]) {
            cap[parent[v]][v] -= bottleneck;
            cap[v][parent[v]] += bottleneck;
        }
        flow += bottleneck;
    }
}

}  // namespace

TEST_CASE("max-flow equals the brute-force minimum cut") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + trial % 10;
        const RandomGraph g = random_graph(n, 2 * n, rng, trial % 2 == 0);
        double best = std::numeric_limits<double>::infinity();
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            std::vector<bool> side(n);
            for (int i = 0; i < n; ++i) side[i] = (mask >> i) & 1u;
            best = std::min(best, cut_value(g, side));
        }
        MaxFlowGraph mf(n);
        const double flow = solve(g, mf);
        CHECK(flow == doctest::Approx(best).epsilon(1e-9));
        std::vector<bool> side(n);
        for (int i = 0; i < n; ++i) side[i] = mf.in_sink_segment(i);
        CHECK(cut_value(g, side) == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("max-flow agrees with Edmonds-Karp on larger graphs") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 30 + trial * 3;
        const RandomGraph g = random_graph(n, 4 * n, rng, trial % 3 == 0);
        MaxFlowGraph mf(n);
        const double flow = solve(g, mf);
        CHECK(flow == doctest::Approx(edmonds_karp(g)).epsilon(1e-9));
        std::vector<bool> side(n);
        for (int i = 0; i < n; ++i) side[i] = mf.in_sink_segment(i);
        CHECK(cut_value(g, side) == doctest::Approx(flow).epsilon(1e-9));
    }
}

TEST_CASE("max-flow on a grid") {
    // 4-connected grid with a source column on the left and a sink column on the right.
    const int w = 30, h = 20;
    MaxFlowGraph mf(w * h);
    for (int y = 0; y < h; ++y) {
        mf.add_tweights(y * w, 100.0, 0.0);
        mf.add_tweights(y * w + w - 1, 0.0, 100.0);
        for (int x = 0; x + 1 < w; ++x) mf.add_edge(y * w + x, y * w + x + 1, x == 12 ? 1.0 : 5.0, 5.0);
        if (y + 1 < h)
            for (int x = 0; x < w; ++x) mf.add_edge(y * w + x, (y + 1) * w + x, 5.0, 5.0);
    }
    CHECK(mf.maxflow() == doctest::Approx(h * 1.0));
    for (int y = 0; y < h; ++y) {
        CHECK_FALSE(mf.in_sink_segment(y * w + 12));
        CHECK(mf.in_sink_segment(y * w + 13));
    }
}

TEST_CASE("max-flow input validation") {
    MaxFlowGraph mf(3);
    CHECK_THROWS_AS(mf.add_edge(0, 3, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(mf.add_edge(0, 1, -1.0, 1.0), ValidationError);
    CHECK(mf.maxflow() == 0.0);
}
