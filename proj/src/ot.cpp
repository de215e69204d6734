#include "otrm/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace otrm {

namespace {

double sq_dist(const double* p, const double* q, int d) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
        double diff = p[j] - q[j];
        s += diff * diff;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Jonker-Volgenant assignment on a dense square cost matrix: column
// reduction, reduction transfer, two augmenting-row-reduction sweeps, then
// shortest augmenting paths. Returns the optimal row -> column assignment.
// ---------------------------------------------------------------------------
void solve_assignment(int n, const std::vector<double>& c, std::vector<int>& rowsol) {
    const double inf = std::numeric_limits<double>::infinity();
    rowsol.assign(n, -1);
    std::vector<int> colsol(n, -1);
    std::vector<double> v(n, 0.0);
    std::vector<int> matches(n, 0);
    std::vector<int> free_rows(n);
    int numfree = 0;

    auto cost = [&](int i, int j) -> double {
        return c[static_cast<std::size_t>(i) * n + j];
    };

    // Column reduction, scanning columns in reverse order.
    for (int j = n - 1; j >= 0; --j) {
        double mn = cost(0, j);
        int imin = 0;
        for (int i = 1; i < n; ++i) {
            if (cost(i, j) < mn) {
                mn = cost(i, j);
                imin = i;
            }
        }
        v[j] = mn;
        if (++matches[imin] == 1) {
            rowsol[imin] = j;
            colsol[j] = imin;
        } else {
            colsol[j] = -1;
        }
    }

    // Reduction transfer from singly-assigned rows.
    for (int i = 0; i < n; ++i) {
        if (matches[i] == 0) {
            free_rows[numfree++] = i;
        } else if (matches[i] == 1) {
            int j1 = rowsol[i];
            double mn = inf;
            for (int j = 0; j < n; ++j)
                if (j != j1 && cost(i, j) - v[j] < mn) mn = cost(i, j) - v[j];
            v[j1] -= mn;
        }
    }

    // Two passes of augmenting row reduction. This phase is a heuristic that
    // shrinks the free-row set before the exact shortest-path phase, so it may
    // stop early: immediate retries happen only when the dual update really
    // moved v[j1] (near-tie updates can be absorbed by rounding, and retrying
    // then livelocks two rows on one column), and a fixed iteration budget
    // bails out to the exact phase on adversarial tie structures.
    for (int pass = 0; pass < 2; ++pass) {
        int k = 0;
        int prvnumfree = numfree;
        numfree = 0;
        long long budget = 16LL * prvnumfree + 64;
        while (k < prvnumfree) {
            if (budget-- <= 0) {
                while (k < prvnumfree) free_rows[numfree++] = free_rows[k++];
                break;
            }
            int i = free_rows[k++];
            double umin = cost(i, 0) - v[0];
            int j1 = 0;
            double usubmin = inf;
            int j2 = -1;
            for (int j = 1; j < n; ++j) {
                double h = cost(i, j) - v[j];
                if (h < usubmin) {
                    if (h >= umin) {
                        usubmin = h;
                        j2 = j;
                    } else {
                        usubmin = umin;
                        umin = h;
                        j2 = j1;
                        j1 = j;
                    }
                }
            }
            int i0 = colsol[j1];
            bool improved = false;
            if (umin < usubmin) {
                const double v_old = v[j1];
                v[j1] -= usubmin - umin;
                improved = v[j1] < v_old;
            } else if (i0 >= 0) {
                j1 = j2;
                i0 = colsol[j1];
            }
            rowsol[i] = j1;
            colsol[j1] = i;
            if (i0 >= 0) {
                if (improved)
                    free_rows[--k] = i0;  // retry the displaced row immediately
                else
                    free_rows[numfree++] = i0;
            }
        }
    }

    // Shortest augmenting path for each remaining free row.
    std::vector<double> d(n);
    std::vector<int> pred(n), collist(n);
    for (int f = 0; f < numfree; ++f) {
        int freerow = free_rows[f];
        for (int j = 0; j < n; ++j) {
            d[j] = cost(freerow, j) - v[j];
            pred[j] = freerow;
            collist[j] = j;
        }
        int low = 0, up = 0, last = -1, endofpath = -1;
        double mn = 0.0;
        bool found = false;
        do {
            if (up == low) {
                last = low - 1;
                mn = d[collist[up++]];
                for (int k = up; k < n; ++k) {
                    int j = collist[k];
                    double h = d[j];
                    if (h <= mn) {
                        if (h < mn) {
                            up = low;
                            mn = h;
                        }
                        collist[k] = collist[up];
                        collist[up++] = j;
                    }
                }
                for (int k = low; k < up; ++k) {
                    if (colsol[collist[k]] < 0) {
                        endofpath = collist[k];
                        found = true;
                        break;
                    }
                }
            }
            if (!found) {
                int j1 = collist[low++];
                int i = colsol[j1];
                double h = cost(i, j1) - v[j1] - mn;
                for (int k = up; k < n; ++k) {
                    int j = collist[k];
                    double v2 = cost(i, j) - v[j] - h;
                    if (v2 < d[j]) {
                        d[j] = v2;
                        pred[j] = i;
                        if (v2 == mn) {
                            if (colsol[j] < 0) {
                                endofpath = j;
                                found = true;
                                break;
                            }
                            collist[k] = collist[up];
                            collist[up++] = j;
                        }
                    }
                }
            }
        } while (!found);

        for (int k = 0; k <= last; ++k) {
            int j1 = collist[k];
            v[j1] += d[j1] - mn;
        }
        int j1 = endofpath;
        int i;
        do {
            i = pred[j1];
            colsol[j1] = i;
            std::swap(rowsol[i], j1);
        } while (i != freerow);
    }
}

// ---------------------------------------------------------------------------
// Transportation network simplex on the complete bipartite graph. Nodes:
// sources 0..n-1, sinks n..n+m-1, root n+m; real arc (i,j) has id i*m+j and
// canonical direction source -> sink. The initial basis is the star through
// the root (artificial arcs at cost M > cmax/2, enough to price any positive
// artificial flow out of every optimum since a single real arc reroutes it).
// Entering arc by block pricing (most negative reduced cost in a cyclic
// block); leaving arc by the last minimum-ratio arc met when traversing
// the cycle from the apex along the push direction, which preserves
// strong feasibility and rules out cycling.
// ---------------------------------------------------------------------------
class transport_simplex {
public:
    transport_simplex(int n, int m, const std::vector<double>& cost,
                      const std::vector<double>& a, const std::vector<double>& b)
        : n_(n), m_(m), nodes_(n + m + 1), root_(n + m), cost_(cost), a_(a), b_(b) {}

    // Solves and appends (i, j, mass) triples for basic arcs with mass > 0.
    void solve(std::vector<coupling_entry>& out) {
        double cmax = 0.0;
        for (double cv : cost_) cmax = std::max(cmax, cv);
        double big = cmax + 1.0;
        for (int attempt = 0; attempt < 4; ++attempt) {
            init_star(big);
            run_pivots(cmax);
            if (max_artificial_flow() <= 1e-11) {
                emit(out);
                return;
            }
            big *= 64.0;  // artificial flow survived: price harder and redo
        }
        throw numerical_error("transport simplex: artificial flow not eliminated");
    }

private:
    int n_, m_, nodes_, root_;
    const std::vector<double>& cost_;
    const std::vector<double>& a_;
    const std::vector<double>& b_;

    std::vector<int> parent_;
    std::vector<long long> parent_arc_;   // real arc id, or -1 for artificial
    std::vector<double> flow_;            // flow on the parent arc
    std::vector<bool> toward_parent_;     // canonical direction points child -> parent
    std::vector<int> depth_;
    std::vector<std::vector<int>> kids_;
    std::vector<double> pi_;
    long long scan_pos_ = 0;

    double arc_cost(long long arc) const { return cost_[static_cast<std::size_t>(arc)]; }
    int arc_src(long long arc) const { return static_cast<int>(arc / m_); }
    int arc_dst(long long arc) const { return n_ + static_cast<int>(arc % m_); }

    void init_star(double big) {
        parent_.assign(nodes_, root_);
        parent_arc_.assign(nodes_, -1);
        flow_.assign(nodes_, 0.0);
        toward_parent_.assign(nodes_, false);
        depth_.assign(nodes_, 1);
        kids_.assign(nodes_, {});
        pi_.assign(nodes_, 0.0);
        parent_[root_] = -1;
        depth_[root_] = 0;
        kids_[root_].reserve(nodes_ - 1);
        for (int i = 0; i < n_; ++i) {
            flow_[i] = a_[i];
            toward_parent_[i] = true;  // source -> root
            pi_[i] = big;
            kids_[root_].push_back(i);
        }
        for (int j = 0; j < m_; ++j) {
            int v = n_ + j;
            flow_[v] = b_[j];
            toward_parent_[v] = false;  // root -> sink
            pi_[v] = -big;
            kids_[root_].push_back(v);
        }
        scan_pos_ = 0;
    }

    double reduced_cost(long long arc) const {
        return arc_cost(arc) - pi_[arc_src(arc)] + pi_[arc_dst(arc)];
    }

    void run_pivots(double cmax) {
        const long long arc_count = static_cast<long long>(n_) * m_;
        const double eps = std::max(cmax, 1.0) * 1e-13;
        const long long block =
            std::max<long long>(64, static_cast<long long>(std::sqrt(static_cast<double>(arc_count))));
        const long long max_pivots = 1000LL * nodes_ + 100000;
        long long pivots = 0;
        while (true) {
            long long entering = -1;
            double best = -eps;
            long long scanned = 0;
            while (scanned < arc_count) {
                long long stop = std::min(arc_count, scanned + block);
                for (; scanned < stop; ++scanned) {
                    long long arc = scan_pos_ + scanned;
                    if (arc >= arc_count) arc -= arc_count;
                    double rc = reduced_cost(arc);
                    if (rc < best) {
                        best = rc;
                        entering = arc;
                    }
                }
                if (entering >= 0) break;
            }
            if (entering < 0) return;  // no eligible arc anywhere: optimal
            scan_pos_ = (scan_pos_ + scanned) % arc_count;
            pivot(entering, best);
            if (++pivots > max_pivots)
                throw numerical_error("transport simplex: pivot limit exceeded");
        }
    }

    void pivot(long long entering, double rc) {
        int src = arc_src(entering);
        int dst = arc_dst(entering);

        // Walk both endpoints to their lowest common ancestor.
        int x = src, y = dst;
        while (depth_[x] > depth_[y]) x = parent_[x];
        while (depth_[y] > depth_[x]) y = parent_[y];
        while (x != y) {
            x = parent_[x];
            y = parent_[y];
        }
        const int apex = x;

        // Collect the two tree paths (cycle = entering + dst..apex + apex..src).
        std::vector<int> path_src, path_dst;  // nodes whose parent arc is on the cycle
        for (int v = src; v != apex; v = parent_[v]) path_src.push_back(v);
        for (int v = dst; v != apex; v = parent_[v]) path_dst.push_back(v);

        // Flow change sign per arc when pushing theta along src -> dst:
        // on the src side the cycle runs parent -> child, on the dst side
        // child -> parent.
        auto is_forward_src_side = [&](int v) { return !toward_parent_[v]; };
        auto is_forward_dst_side = [&](int v) { return toward_parent_[v]; };

        double theta = std::numeric_limits<double>::infinity();
        for (int v : path_src)
            if (!is_forward_src_side(v)) theta = std::min(theta, flow_[v]);
        for (int v : path_dst)
            if (!is_forward_dst_side(v)) theta = std::min(theta, flow_[v]);
        if (!std::isfinite(theta))
            throw numerical_error("transport simplex: unbounded cycle");

        // Leaving arc: the LAST minimum-ratio backward arc met when the
        // cycle is traversed from the apex along the push direction
        // (apex -> src .. entering .. dst -> apex). Concretely: the dst-side
        // blocking arc nearest the apex if one exists, else the src-side
        // blocking arc nearest the entering tail. This keeps every
        // degenerate basic arc pointing toward the root (strong
        // feasibility), which rules out cycling.
        int leave = -1;
        bool leave_on_src_side = false;
        for (auto it = path_dst.rbegin(); it != path_dst.rend(); ++it) {
            if (!is_forward_dst_side(*it) && flow_[*it] <= theta) {
                leave = *it;
                break;
            }
        }
        if (leave < 0) {
            for (int v : path_src) {
                if (!is_forward_src_side(v) && flow_[v] <= theta) {
                    leave = v;
                    leave_on_src_side = true;
                    break;
                }
            }
        }
        if (leave < 0) throw numerical_error("transport simplex: no leaving arc");

        // Apply the flow change around the cycle.
        for (int v : path_src) flow_[v] += is_forward_src_side(v) ? theta : -theta;
        for (int v : path_dst) flow_[v] += is_forward_dst_side(v) ? theta : -theta;

        // Re-hang the cut subtree from the entering arc. The subtree below
        // `leave` contains exactly one endpoint of the entering arc.
        int sub_end = leave_on_src_side ? src : dst;
        int top_end = leave_on_src_side ? dst : src;

        // Reverse the parent chain sub_end .. leave.
        int prev = sub_end;
        int cur = parent_[sub_end];
        long long carry_arc = parent_arc_[sub_end];
        double carry_flow = flow_[sub_end];
        bool carry_toward = toward_parent_[sub_end];
        detach(sub_end);
        while (prev != leave) {
            int nxt = parent_[cur];
            long long next_arc = parent_arc_[cur];
            double next_flow = flow_[cur];
            bool next_toward = toward_parent_[cur];
            detach(cur);
            parent_[cur] = prev;
            parent_arc_[cur] = carry_arc;
            flow_[cur] = carry_flow;
            toward_parent_[cur] = !carry_toward;
            kids_[prev].push_back(cur);
            prev = cur;
            cur = nxt;
            carry_arc = next_arc;
            carry_flow = next_flow;
            carry_toward = next_toward;
        }

        // Attach the re-rooted subtree through the entering arc.
        parent_[sub_end] = top_end;
        parent_arc_[sub_end] = entering;
        flow_[sub_end] = theta;
        toward_parent_[sub_end] = (sub_end == src);
        kids_[top_end].push_back(sub_end);

        // Potentials shift by a constant on the moved subtree so the
        // entering arc's reduced cost becomes zero.
        double delta = (sub_end == src) ? rc : -rc;
        refresh_subtree(sub_end, delta);
    }

    void detach(int v) {
        auto& siblings = kids_[parent_[v]];
        for (std::size_t idx = 0; idx < siblings.size(); ++idx) {
            if (siblings[idx] == v) {
                siblings[idx] = siblings.back();
                siblings.pop_back();
                return;
            }
        }
        throw numerical_error("transport simplex: tree bookkeeping corrupted");
    }

    void refresh_subtree(int head, double delta) {
        std::vector<int> stack{head};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            pi_[v] += delta;
            depth_[v] = depth_[parent_[v]] + 1;
            for (int child : kids_[v]) stack.push_back(child);
        }
    }

    double max_artificial_flow() const {
        double worst = 0.0;
        for (int v = 0; v < nodes_; ++v)
            if (v != root_ && parent_arc_[v] < 0) worst = std::max(worst, flow_[v]);
        return worst;
    }

    void emit(std::vector<coupling_entry>& out) const {
        for (int v = 0; v < nodes_; ++v) {
            if (v == root_ || parent_arc_[v] < 0 || flow_[v] <= 0.0) continue;
            long long arc = parent_arc_[v];
            out.push_back({arc_src(arc), arc_dst(arc) - n_, flow_[v]});
        }
    }
};

struct filtered_measure {
    std::vector<double> w;       // positive weights only
    std::vector<double> x;       // matching coordinates
    std::vector<int> orig_index; // position in the original measure
    int d = 1;

    int n() const { return static_cast<int>(w.size()); }
    const double* point(int i) const { return x.data() + static_cast<std::size_t>(i) * d; }
};

filtered_measure filter_atoms(const discrete_measure& m, const char* side) {
    filtered_measure f;
    f.d = m.d;
    double total = 0.0;
    for (int i = 0; i < m.n(); ++i) {
        if (m.w[i] > 0.0) {
            f.w.push_back(m.w[i]);
            f.orig_index.push_back(i);
            const double* p = m.point(i);
            f.x.insert(f.x.end(), p, p + m.d);
            total += m.w[i];
        }
    }
    if (total < 1e-15)
        throw config_error(std::string("w2_exact: degenerate weights on ") + side +
                           " (total below 1e-15 after filtering)");
    return f;
}

}  // namespace

double w2_1d(const discrete_measure& mu, const discrete_measure& nu) {
    mu.validate();
    nu.validate();
    if (mu.d != 1 || nu.d != 1) throw config_error("w2_1d: requires d = 1");

    auto sorted = [](const discrete_measure& m) {
        std::vector<int> idx(m.n());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(),
                  [&m](int i, int j) { return m.x[i] < m.x[j]; });
        std::vector<double> xs(m.n()), cum(m.n());
        double acc = 0.0;
        for (int k = 0; k < m.n(); ++k) {
            xs[k] = m.x[idx[k]];
            acc += m.w[idx[k]];
            cum[k] = acc;
        }
        cum.back() = 1.0;
        return std::make_pair(xs, cum);
    };
    auto [xa, ca] = sorted(mu);
    auto [xb, cb] = sorted(nu);

    // Integrate (F_mu^{-1} - F_nu^{-1})^2 over the merged weight partition.
    double acc = 0.0, pos = 0.0;
    std::size_t i = 0, j = 0;
    while (i < xa.size() && j < xb.size()) {
        double nxt = std::min(ca[i], cb[j]);
        double dw = nxt - pos;
        if (dw > 0.0) {
            double diff = xa[i] - xb[j];
            acc += dw * diff * diff;
        }
        pos = nxt;
        if (ca[i] <= nxt) ++i;
        if (cb[j] <= nxt) ++j;
    }
    if (acc < kCostClamp) acc = 0.0;
    return std::sqrt(acc);
}

transport_result w2_exact(const discrete_measure& mu, const discrete_measure& nu) {
    mu.validate();
    nu.validate();
    if (mu.d != nu.d) throw config_error("w2_exact: dimension mismatch");

    filtered_measure fa = filter_atoms(mu, "source");
    filtered_measure fb = filter_atoms(nu, "target");
    const int n = fa.n(), m = fb.n();
    if (n > kMaxSolverAtoms || m > kMaxSolverAtoms)
        throw guard_error("w2_exact: problem size " + std::to_string(n) + "x" +
                          std::to_string(m) + " exceeds the " +
                          std::to_string(kMaxSolverAtoms) + "-atom guard");

    std::vector<double> cost(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        const double* p = fa.point(i);
        double* row = cost.data() + static_cast<std::size_t>(i) * m;
        for (int j = 0; j < m; ++j) {
            double c = sq_dist(p, fb.point(j), fa.d);
            row[j] = (c < kCostClamp) ? 0.0 : c;
        }
    }

    transport_result res;
    bool uniform_square = (n == m);
    if (uniform_square) {
        for (int i = 0; i < n && uniform_square; ++i)
            if (std::abs(fa.w[i] - 1.0 / n) > 1e-15 || std::abs(fb.w[i] - 1.0 / n) > 1e-15)
                uniform_square = false;
    }

    if (uniform_square) {
        std::vector<int> rowsol;
        solve_assignment(n, cost, rowsol);
        res.plan.entries.reserve(n);
        for (int i = 0; i < n; ++i)
            res.plan.entries.push_back({fa.orig_index[i], fb.orig_index[rowsol[i]], fa.w[i]});
        double total = 0.0;
        for (int i = 0; i < n; ++i)
            total += cost[static_cast<std::size_t>(i) * m + rowsol[i]];
        res.cost2 = total / n;
    } else {
        std::vector<coupling_entry> entries;
        transport_simplex solver(n, m, cost, fa.w, fb.w);
        solver.solve(entries);
        double total = 0.0;
        for (auto& e : entries) {
            total += e.mass * cost[static_cast<std::size_t>(e.i) * m + e.j];
            e.i = fa.orig_index[e.i];
            e.j = fb.orig_index[e.j];
        }
        res.plan.entries = std::move(entries);
        res.cost2 = total;
    }

    if (res.cost2 < kCostClamp) res.cost2 = 0.0;
    res.w2 = std::sqrt(res.cost2);
    res.source = mu;
    res.target = nu;
    return res;
}

double w2sq(const discrete_measure& mu, const discrete_measure& nu) {
    if (mu.d == 1 && nu.d == 1) {
        double w = w2_1d(mu, nu);
        return w * w;
    }
    return w2_exact(mu, nu).cost2;
}

marginal_report check_coupling(const coupling& c, const discrete_measure& mu,
                               const discrete_measure& nu) {
    std::vector<double> row(mu.n(), 0.0), col(nu.n(), 0.0);
    for (const auto& e : c.entries) {
        if (e.i < 0 || e.i >= mu.n() || e.j < 0 || e.j >= nu.n())
            throw config_error("check_coupling: entry index out of range");
        row[e.i] += e.mass;
        col[e.j] += e.mass;
    }
    marginal_report rep;
    for (int i = 0; i < mu.n(); ++i)
        rep.max_row_dev = std::max(rep.max_row_dev, std::abs(row[i] - mu.w[i]));
    for (int j = 0; j < nu.n(); ++j)
        rep.max_col_dev = std::max(rep.max_col_dev, std::abs(col[j] - nu.w[j]));
    rep.ok = rep.max_row_dev <= 1e-10 && rep.max_col_dev <= 1e-10;
    return rep;
}

}  // namespace otrm
