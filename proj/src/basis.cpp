#include "qbench/basis.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace qbench {

std::string configuration_to_string(const Configuration& z) {
    std::string out;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(static_cast<int>(z[i]));
    }
    return out;
}

Configuration configuration_from_string(const std::string& text) {
    Configuration z;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) throw ValidationError("empty occupation entry in '" + text + "'");
        int v = 0;
        try {
            size_t pos = 0;
            v = std::stoi(tok, &pos);
            while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ValidationError("bad occupation entry '" + tok + "' in '" + text + "'");
        }
        if (v < 0 || v > 255) throw ValidationError("occupation out of range in '" + text + "'");
        z.push_back(static_cast<std::uint8_t>(v));
    }
    if (z.empty()) throw ValidationError("empty configuration string");
    return z;
}

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::bose_hubbard: return "bose-hubbard";
        case ModelKind::fermi_hubbard: return "fermi-hubbard";
        case ModelKind::spin_chain: return "spin-chain";
        case ModelKind::pxp_1d: return "pxp-1d";
        case ModelKind::pxp_2d: return "pxp-2d";
    }
    return "unknown";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "bose-hubbard") return ModelKind::bose_hubbard;
    if (name == "fermi-hubbard") return ModelKind::fermi_hubbard;
    if (name == "spin-chain") return ModelKind::spin_chain;
    if (name == "pxp-1d") return ModelKind::pxp_1d;
    if (name == "pxp-2d") return ModelKind::pxp_2d;
    throw ValidationError("unknown model kind '" + name +
                          "' (expected bose-hubbard, fermi-hubbard, spin-chain, pxp-1d, pxp-2d)");
}

void LatticeSpec::validate() const {
    if (kind == ModelKind::pxp_2d) {
        if (rows < 1 || cols < 1)
            throw ValidationError("pxp-2d grid must have positive extent, got " +
                                  std::to_string(rows) + "x" + std::to_string(cols));
    } else if (length < 1) {
        throw ValidationError("chain length must be >= 1, got " + std::to_string(length));
    }
    if (kind == ModelKind::bose_hubbard) {
        if (n_bosons < 0) throw ValidationError("boson count must be >= 0");
    }
    if (kind == ModelKind::fermi_hubbard) {
        if (n_up < 0 || n_down < 0) throw ValidationError("fermion counts must be >= 0");
        if (n_up > length || n_down > length)
            throw ValidationError("fermion count exceeds site capacity (" + std::to_string(n_up) +
                                  " up, " + std::to_string(n_down) + " down on " +
                                  std::to_string(length) + " sites)");
    }
}

LatticeSpec LatticeSpec::bose_hubbard_chain(int sites, int bosons) {
    LatticeSpec s;
    s.kind = ModelKind::bose_hubbard;
    s.length = sites;
    s.n_bosons = bosons;
    s.validate();
    return s;
}

LatticeSpec LatticeSpec::fermi_hubbard_chain(int sites, int up, int down) {
    LatticeSpec s;
    s.kind = ModelKind::fermi_hubbard;
    s.length = sites;
    s.n_up = up;
    s.n_down = down;
    s.validate();
    return s;
}

LatticeSpec LatticeSpec::spin_chain(int sites) {
    LatticeSpec s;
    s.kind = ModelKind::spin_chain;
    s.length = sites;
    s.validate();
    return s;
}

LatticeSpec LatticeSpec::pxp_chain(int sites, bool periodic) {
    LatticeSpec s;
    s.kind = ModelKind::pxp_1d;
    s.length = sites;
    s.periodic = periodic;
    s.validate();
    return s;
}

LatticeSpec LatticeSpec::pxp_grid(int rows, int cols, bool periodic) {
    LatticeSpec s;
    s.kind = ModelKind::pxp_2d;
    s.rows = rows;
    s.cols = cols;
    s.periodic = periodic;
    s.validate();
    return s;
}

namespace {

void enumerate_compositions(int sites, int total, Configuration& cur,
                            std::vector<Configuration>& out) {
    // Lexicographic by construction: fill site by site with ascending counts.
    if (static_cast<int>(cur.size()) == sites - 1) {
        cur.push_back(static_cast<std::uint8_t>(total));
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int n = 0; n <= total; ++n) {
        cur.push_back(static_cast<std::uint8_t>(n));
        enumerate_compositions(sites, total - n, cur, out);
        cur.pop_back();
    }
}

std::vector<Configuration> enumerate_bitstrings_fixed_weight(int sites, int weight) {
    std::vector<Configuration> out;
    Configuration cur(sites, 0);
    std::function<void(int, int)> rec = [&](int site, int remaining) {
        if (remaining == 0) {
            out.push_back(cur);
            return;
        }
        if (sites - site < remaining) return;
        cur[site] = 0;
        rec(site + 1, remaining);
        cur[site] = 1;
        rec(site + 1, remaining - 1);
        cur[site] = 0;
    };
    rec(0, weight);
    return out;
}

void enumerate_pxp(const LatticeSpec& spec, const std::vector<std::vector<int>>& nbrs,
                   std::vector<Configuration>& out) {
    const int n = spec.sites();
    Configuration cur(n, 0);
    std::function<void(int)> rec = [&](int site) {
        if (site == n) {
            out.push_back(cur);
            return;
        }
        cur[site] = 0;
        rec(site + 1);
        bool ok = true;
        for (int m : nbrs[site])
            if (m < site && cur[m]) { ok = false; break; }
        if (ok) {
            cur[site] = 1;
            rec(site + 1);
            cur[site] = 0;
        }
    };
    rec(0);
}

std::vector<std::vector<int>> adjacency(const LatticeSpec& spec) {
    const int n = spec.sites();
    std::vector<std::vector<int>> nbrs(n);
    if (spec.kind == ModelKind::pxp_2d) {
        auto id = [&](int r, int c) { return r * spec.cols + c; };
        for (int r = 0; r < spec.rows; ++r) {
            for (int c = 0; c < spec.cols; ++c) {
                const int s = id(r, c);
                auto add = [&](int rr, int cc) {
                    if (spec.periodic) {
                        rr = (rr + spec.rows) % spec.rows;
                        cc = (cc + spec.cols) % spec.cols;
                    } else if (rr < 0 || rr >= spec.rows || cc < 0 || cc >= spec.cols) {
                        return;
                    }
                    const int t = id(rr, cc);
                    if (t != s) nbrs[s].push_back(t);
                };
                add(r - 1, c);
                add(r + 1, c);
                add(r, c - 1);
                add(r, c + 1);
            }
        }
    } else {
        for (int s = 0; s < n; ++s) {
            if (s > 0) nbrs[s].push_back(s - 1);
            if (s + 1 < n) nbrs[s].push_back(s + 1);
            if (spec.periodic && n > 2) {
                if (s == 0) nbrs[s].push_back(n - 1);
                if (s == n - 1) nbrs[s].push_back(0);
            }
        }
        for (auto& v : nbrs) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
    }
    return nbrs;
}

} // namespace

Basis enumerate_basis(const LatticeSpec& spec) {
    spec.validate();
    Basis basis;
    basis.spec_ = spec;
    auto& out = basis.configs_;

    switch (spec.kind) {
        case ModelKind::bose_hubbard: {
            Configuration cur;
            cur.reserve(spec.length);
            enumerate_compositions(spec.length, spec.n_bosons, cur, out);
            break;
        }
        case ModelKind::fermi_hubbard: {
            const auto ups = enumerate_bitstrings_fixed_weight(spec.length, spec.n_up);
            const auto downs = enumerate_bitstrings_fixed_weight(spec.length, spec.n_down);
            out.reserve(ups.size() * downs.size());
            for (const auto& u : ups) {
                for (const auto& d : downs) {
                    Configuration z = u;
                    z.insert(z.end(), d.begin(), d.end());
                    out.push_back(std::move(z));
                }
            }
            break;
        }
        case ModelKind::spin_chain: {
            if (spec.length > 26) throw ValidationError("spin chain too large to enumerate");
            const std::int64_t d = std::int64_t{1} << spec.length;
            out.reserve(d);
            for (std::int64_t v = 0; v < d; ++v) {
                Configuration z(spec.length);
                for (int s = 0; s < spec.length; ++s)
                    z[s] = static_cast<std::uint8_t>((v >> (spec.length - 1 - s)) & 1);
                out.push_back(std::move(z));
            }
            break;
        }
        case ModelKind::pxp_1d:
        case ModelKind::pxp_2d: {
            enumerate_pxp(spec, adjacency(spec), out);
            break;
        }
    }

    if (!std::is_sorted(out.begin(), out.end()))
        std::sort(out.begin(), out.end());
    return basis;
}

const Configuration& Basis::configuration_of(std::int64_t i) const {
    if (i < 0 || i >= dimension())
        throw ValidationError("basis index " + std::to_string(i) + " out of range (D=" +
                              std::to_string(dimension()) + ")");
    return configs_[static_cast<std::size_t>(i)];
}

std::optional<std::int64_t> Basis::index_of(const Configuration& z) const {
    if (static_cast<int>(z.size()) != spec_.config_length())
        throw ValidationError("configuration length " + std::to_string(z.size()) +
                              " does not match basis (expected " +
                              std::to_string(spec_.config_length()) + ")");
    auto it = std::lower_bound(configs_.begin(), configs_.end(), z);
    if (it == configs_.end() || *it != z) return std::nullopt;
    return static_cast<std::int64_t>(it - configs_.begin());
}

std::vector<int> Basis::neighbours(int site) const {
    return adjacency(spec_)[site];
}

namespace {
std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}
} // namespace

std::int64_t basis_dimension_formula(const LatticeSpec& spec) {
    switch (spec.kind) {
        case ModelKind::bose_hubbard:
            return binomial(spec.n_bosons + spec.length - 1, spec.n_bosons);
        case ModelKind::fermi_hubbard:
            return binomial(spec.length, spec.n_up) * binomial(spec.length, spec.n_down);
        case ModelKind::spin_chain:
            return std::int64_t{1} << spec.length;
        case ModelKind::pxp_1d: {
            // Open chain: Fibonacci recursion over allowed suffixes.
            if (spec.periodic) break;
            std::int64_t a = 1, b = 2; // L=0 -> 1, L=1 -> 2
            for (int i = 1; i < spec.length; ++i) {
                const std::int64_t c = a + b;
                a = b;
                b = c;
            }
            return spec.length == 0 ? 1 : b;
        }
        case ModelKind::pxp_2d: {
            if (spec.periodic) break;
            // Row-to-row transfer over independent-set row patterns.
            const int c = spec.cols;
            std::vector<std::uint32_t> rows_ok;
            for (std::uint32_t m = 0; m < (1u << c); ++m)
                if ((m & (m >> 1)) == 0) rows_ok.push_back(m);
            std::vector<std::int64_t> cnt(rows_ok.size(), 1);
            for (int r = 1; r < spec.rows; ++r) {
                std::vector<std::int64_t> nxt(rows_ok.size(), 0);
                for (std::size_t i = 0; i < rows_ok.size(); ++i)
                    for (std::size_t j = 0; j < rows_ok.size(); ++j)
                        if ((rows_ok[i] & rows_ok[j]) == 0) nxt[i] += cnt[j];
                cnt = nxt;
            }
            std::int64_t total = 0;
            for (auto v : cnt) total += v;
            return total;
        }
    }
    throw ValidationError("no closed-form dimension for this spec");
}

} // namespace qbench
