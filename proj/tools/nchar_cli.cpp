#include <nchar/io.hpp>
#include <nchar/verify.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace nchar;

namespace {

enum class Format { Table, Csv, Json };

struct Globals {
    long trunc = 32;
    std::uint64_t seed = 20240601;
    Format format = Format::Table;
};

// exit code 1: an asserted identity failed
struct IdentityFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(bool ok, const std::string& what)
{
    if (!ok) throw IdentityFailure(what);
}

std::vector<long> parse_longs(const std::string& s, char sep = ',')
{
    std::vector<long> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep))
        if (!tok.empty()) out.push_back(std::stol(tok));
    return out;
}

std::vector<Q> parse_rationals(const std::string& s)
{
    std::vector<Q> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(parse_rational(tok));
    return out;
}

json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path);
    return json::parse(in);
}

// key/value output in the chosen format
void emit(const Globals& g, const std::vector<std::pair<std::string, std::string>>& kv)
{
    if (g.format == Format::Json) {
        json j;
        for (const auto& [k, v] : kv) j[k] = v;
        std::cout << j.dump() << "\n";
    } else if (g.format == Format::Csv) {
        for (std::size_t i = 0; i < kv.size(); ++i) std::cout << (i ? "," : "") << kv[i].first;
        std::cout << "\n";
        for (std::size_t i = 0; i < kv.size(); ++i) std::cout << (i ? "," : "") << kv[i].second;
        std::cout << "\n";
    } else if (kv.size() == 1) {
        std::cout << kv.front().second << "\n";
    } else {
        for (const auto& [k, v] : kv) std::cout << k << ": " << v << "\n";
    }
}

std::string join(const std::vector<long>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string yesno(bool b) { return b ? "true" : "false"; }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact p-adic character computations"};
    app.set_help_flag("--help", "print this help");
    app.require_subcommand(1);
    Globals g;
    std::string format = "table";
    app.add_option("--trunc", g.trunc, "truncation degree for coefficient expansions")->capture_default_str();
    app.add_option("--seed", g.seed, "seed for randomized suites")->capture_default_str();
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"table", "csv", "json"}))->capture_default_str();

    std::function<void()> action;

    // smooth-trace
    long st_p = 3, st_h = 1;
    std::string st_s = "1";
    bool st_inv = false;
    auto* st = app.add_subcommand("smooth-trace", "trace of s on locally constant functions of level h");
    st->add_option("--p", st_p)->required();
    st->add_option("--h", st_h)->required();
    st->add_option("--s", st_s)->required();
    st->add_flag("--inverted", st_inv, "use the inverted covering");
    st->callback([&] {
        action = [&] {
            Q s = parse_rational(st_s);
            Z t = smooth_trace(st_p, st_h, s, st_inv ? Covering::Inverted : Covering::Standard);
            if (!st_inv) check(t == ipow(st_p, std::min(st_h, s == 1 ? kInfiniteValuation : vp(1 / s - 1, st_p))), "closed form");
            emit(g, {{"trace", t.get_str()}});
        };
    });

    // eps-r
    long er_p = 3;
    std::string er_r;
    auto* er = app.add_subcommand("eps-r", "the p-power eps(r)");
    er->add_option("--p", er_p)->required();
    er->add_option("--r", er_r, "norm parameter p^-a/b")->required();
    er->callback([&] {
        action = [&] {
            auto [p, q] = parse_pexponent(er_r);
            if (p != er_p) throw DomainError("norm parameter base differs from --p");
            emit(g, {{"eps", epsilon_r(PExponent(q), PContext(er_p)).value.get_str()}});
        };
    });

    // snf
    std::string snf_matrix, snf_big, snf_sub;
    auto* snf = app.add_subcommand("snf", "Smith invariants or p-elementary divisors");
    snf->add_option("--matrix", snf_matrix, "integer rows, e.g. 2,4;6,8");
    snf->add_option("--lattice", snf_big, "JSON lattice");
    snf->add_option("--sub", snf_sub, "JSON sublattice");
    snf->callback([&] {
        action = [&] {
            if (!snf_matrix.empty()) {
                std::vector<std::vector<long>> rows;
                std::stringstream ss(snf_matrix);
                std::string r;
                while (std::getline(ss, r, ';')) rows.push_back(parse_longs(r));
                if (rows.empty()) throw DomainError("empty matrix");
                ZMatrix m(rows.size(), rows.front().size());
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    if (rows[i].size() != m.cols()) throw DomainError("ragged matrix");
                    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
                }
                std::vector<long> inv;
                std::string s;
                for (const auto& d : smith_invariants(m)) s += (s.empty() ? "" : ",") + d.get_str();
                emit(g, {{"invariants", s}});
                return;
            }
            if (snf_big.empty() || snf_sub.empty()) throw CLI::ValidationError("snf", "give --matrix or --lattice and --sub");
            auto a = p_elementary_divisors(lattice_from_json(read_json(snf_big)), lattice_from_json(read_json(snf_sub)));
            emit(g, {{"divisors", join(a)}});
        };
    });

    // powerful
    long pw_p = 5;
    std::string pw_heis;
    auto* pw = app.add_subcommand("powerful", "powerful test for unipotent 3x3 groups");
    pw->add_option("--p", pw_p)->required();
    pw->add_option("--heisenberg", pw_heis, "exponents x12,x13,x23 of the entry ideals")->required();
    pw->callback([&] {
        action = [&] {
            auto x = parse_longs(pw_heis);
            if (x.size() != 3) throw DomainError("--heisenberg needs three exponents");
            emit(g, {{"powerful", yesno(is_powerful(heisenberg_lattice(pw_p, x[0], x[1], x[2])))}});
        };
    });

    // binom-id
    long bi_a = 0, bi_b = 0, bi_c = 0, bi_d = 0, bi_h = 0, bi_p = 2;
    auto* bi = app.add_subcommand("binom-id", "alternating binomial sums");
    for (auto [n, v] : {std::pair{"--a", &bi_a}, {"--b", &bi_b}, {"--c", &bi_c}, {"--d", &bi_d}, {"--h", &bi_h}, {"--p", &bi_p}})
        bi->add_option(n, *v)->capture_default_str();
    bi->callback([&] {
        action = [&] {
            auto v = binom_identity_checks(bi_a, bi_b, bi_c, bi_d, bi_h, bi_p);
            emit(g, {{"sum_i", v.value_i.get_str()},
                     {"sum_ii", v.value_ii.get_str()},
                     {"claim_i", yesno(v.claim_i_holds)},
                     {"claim_ii", yesno(v.claim_ii_holds)}});
            check(v.claim_i_holds && v.claim_ii_holds, "binomial identity");
        };
    });

    // dominance
    long dm_p = 3, dm_T = -1;
    std::string dm_beta, dm_gamma, dm_r;
    auto* dm = app.add_subcommand("dominance", "dominance of the re-expansion coefficients");
    dm->add_option("--p", dm_p)->required();
    dm->add_option("--beta", dm_beta)->required();
    dm->add_option("--gamma", dm_gamma)->required();
    dm->add_option("--r", dm_r, "comma-separated p^-a/b, one per coordinate")->required();
    dm->add_option("--T", dm_T, "index bound (default --trunc)");
    dm->callback([&] {
        action = [&] {
            std::vector<PExponent> r;
            std::stringstream ss(dm_r);
            std::string tok;
            while (std::getline(ss, tok, ',')) r.push_back(PExponent(parse_pexponent(tok).second));
            auto rep = subgroup_expansion_dominance(parse_longs(dm_beta), parse_longs(dm_gamma), r, dm_p, dm_T < 0 ? g.trunc : dm_T);
            emit(g, {{"s_beta", join(rep.s_beta)}, {"unit_at_s", yesno(rep.unit_at_s)}, {"strict", yesno(rep.strict_elsewhere)}});
            check(rep.ok(), "dominance");
        };
    });

    // amice
    long am_p = 3, am_h = 1, am_k = 8;
    std::string am_rule = "digit-length", am_class = "O_h", am_lambda, am_table;
    auto* am = app.add_subcommand("amice", "range-qualified Mahler class test");
    am->add_option("--p", am_p)->required();
    am->add_option("--h", am_h)->capture_default_str();
    am->add_option("--rule", am_rule, "catalog rule: zero, bounded, half-digit, full-digit, digit-length")->capture_default_str();
    am->add_option("--table", am_table, "JSON object {\"n\": \"v_p(b_n)\"}; absent n means b_n = 0");
    am->add_option("--class", am_class)->check(CLI::IsMember({"C_r", "C_r+", "O_h"}))->capture_default_str();
    am->add_option("--lambda", am_lambda, "exponent lambda of r = p^-lambda (default lambda_h)");
    am->add_option("--blocks", am_k, "test n < p^blocks")->capture_default_str();
    am->callback([&] {
        action = [&] {
            ValuationRule rule = amice_rule(am_rule, am_p, am_h).rule;
            if (!am_table.empty()) {
                const json table = read_json(am_table);
                std::map<long, Q> t;
                for (const auto& [n, v] : table.items()) t[std::stol(n)] = parse_rational(v.get<std::string>());
                rule = [t](long n) { auto it = t.find(n); return it == t.end() ? std::optional<Q>{} : std::optional<Q>(it->second); };
            }
            Q lam = am_lambda.empty() ? lambda_h(am_p, am_h) : parse_rational(am_lambda);
            AmiceClass cls = am_class == "C_r" ? AmiceClass::C_r : am_class == "C_r+" ? AmiceClass::C_r_plus : AmiceClass::O_h;
            auto v = amice_class_check(rule, am_p, am_h, cls, lam, am_k);
            std::string mins;
            for (const auto& m : v.block_minima) mins += (mins.empty() ? "" : " ") + m.get_str();
            emit(g, {{"member", yesno(v.member)}, {"block_minima", mins}});
        };
    });

    // straighten
    long sr_k1 = 7, sr_k2 = 1, sr_words = 10;
    auto* sr = app.add_subcommand("straighten", "straighten random Heisenberg words");
    sr->add_option("--k1", sr_k1)->capture_default_str();
    sr->add_option("--k2", sr_k2)->capture_default_str();
    sr->add_option("--words", sr_words)->capture_default_str();
    sr->callback([&] {
        action = [&] {
            std::mt19937_64 rng(g.seed);
            if (g.format == Format::Csv) std::cout << "word,terms,rewrites,min_degree,oracle_ok\n";
            bool all_ok = true;
            for (long t = 0; t < sr_words; ++t) {
                auto sd = random_heisenberg_data(rng);
                auto e = random_power_word(3, sr_k1, rng);
                auto rep = straighten(sd, e, sr_k2);
                bool ok = oracle_canonical(sd, e) == oracle_canonical(sd, rep.normal_form);
                all_ok = all_ok && ok && rep.remainder_vanished();
                if (g.format == Format::Csv)
                    std::cout << t << "," << rep.normal_form.size() << "," << rep.rewrites << "," << rep.min_degree << ","
                              << (ok ? 1 : 0) << "\n";
                else
                    std::cout << "word " << t << ": " << rep.normal_form.size() << " terms, min degree " << rep.min_degree
                              << ", oracle " << (ok ? "agrees" : "DISAGREES") << "\n";
            }
            check(all_ok, "straightening");
        };
    });

    // sl2-trace
    SL2Config tr_cfg;
    std::string tr_a = "2", tr_side = "plus", tr_model = "standard";
    auto* tr = app.add_subcommand("sl2-trace", "trace of diag(a, a^-1) on one quotient");
    tr->add_option("--p", tr_cfg.p)->required();
    tr->add_option("--c", tr_cfg.c)->capture_default_str();
    tr->add_option("--a", tr_a)->required();
    tr->add_option("--h", tr_cfg.h_plus, "level exponent h (both sides)")->capture_default_str();
    tr->add_option("--e", tr_cfg.e)->capture_default_str();
    tr->add_option("--k", tr_cfg.k)->capture_default_str();
    tr->add_option("--side", tr_side)->check(CLI::IsMember({"plus", "minus"}))->capture_default_str();
    tr->add_option("--model", tr_model, "minus-side model")->check(CLI::IsMember({"standard", "nadic"}))->capture_default_str();
    tr->callback([&] {
        action = [&] {
            tr_cfg.h_minus = tr_cfg.h_plus;
            Q a = parse_rational(tr_a);
            Side side = tr_side == "plus" ? Side::Plus : Side::Minus;
            Q t, cf;
            if (side == Side::Minus && tr_model == "nadic") {
                t = sl2_action_matrix_nadic_minus(a, tr_cfg).trace();
                cf = sl2_trace_closed_form_nadic_minus(a, tr_cfg);
            } else {
                t = sl2_trace(a, tr_cfg, side);
                cf = sl2_trace_closed_form(a, tr_cfg, side);
            }
            emit(g, {{"trace", t.get_str()}, {"closed_form", cf.get_str()}});
            check(t == cf, "trace differs from the closed form");
        };
    });

    // sl2-theta
    long th_p = 5, th_c = 0;
    std::string th_a = "2", th_model = "standard";
    bool th_closed = false;
    auto* th = app.add_subcommand("sl2-theta", "n-character of the SL2 principal series at diag(a, a^-1)");
    th->add_option("--p", th_p)->required();
    th->add_option("--c", th_c)->capture_default_str();
    th->add_option("--a", th_a)->required();
    th->add_option("--model", th_model)->check(CLI::IsMember({"standard", "nadic"}))->capture_default_str();
    th->add_flag("--closed-form", th_closed, "print the closed formula without running the pipeline");
    th->callback([&] {
        action = [&] {
            Q a = parse_rational(th_a);
            const bool nadic = th_model == "nadic";
            Q closed = nadic ? theta_sl2_nadic(a, th_c, th_p) : theta_sl2(a, th_c, th_p);
            if (th_closed) {
                emit(g, {{"theta", closed.get_str()}});
                return;
            }
            auto res = ncharacter_sweep_sl2(th_p, th_c, a, SweepGrid{}, nadic);
            if (!res.value) throw NotStabilized("no grid point reached the stable regime");
            emit(g, {{"theta", res.value->get_str()}});
            check(*res.value == closed, "pipeline value differs from the closed formula " + closed.get_str());
        };
    });

    // iwahori-theta
    std::string iw_file, iw_roots, iw_chi, iw_s;
    long iw_p = 3;
    auto* iw = app.add_subcommand("iwahori-theta", "n-character for an Iwahori root datum");
    iw->add_option("--root-datum", iw_file, "JSON root datum");
    iw->add_option("--p", iw_p)->capture_default_str();
    iw->add_option("--roots", iw_roots, "roots as exponent vectors, e.g. 1,0;0,1");
    iw->add_option("--chi", iw_chi, "chi_w exponent vector");
    iw->add_option("--s", iw_s, "torus point, comma-separated rationals")->required();
    iw->callback([&] {
        action = [&] {
            RootDatum rd;
            if (!iw_file.empty()) {
                rd = root_datum_from_json(read_json(iw_file));
            } else {
                if (iw_roots.empty()) throw CLI::ValidationError("iwahori-theta", "give --root-datum or --roots");
                std::stringstream ss(iw_roots);
                std::string r;
                while (std::getline(ss, r, ';')) rd.roots.push_back(parse_longs(r));
                rd.p = iw_p;
                rd.t = static_cast<long>(rd.roots.front().size());
                rd.chi_w = iw_chi.empty() ? std::vector<long>(rd.t, 0) : parse_longs(iw_chi);
                rd.levels.assign(rd.roots.size(), 1);
                rd.validate();
            }
            TorusPoint s = parse_rationals(iw_s);
            auto res = ncharacter_sweep_iwahori(rd, s, iwahori_default_grid());
            if (!res.value) throw NotStabilized("no grid point reached the stable regime");
            emit(g, {{"theta", res.value->get_str()}});
            check(*res.value == theta_iwahori(s, rd), "pipeline value differs from the closed formula");
        };
    });

    // sweep
    long sw_p = 5, sw_c = 0;
    std::string sw_a = "2", sw_h = "0,1,2", sw_e = "0,1,2", sw_k, sw_model = "standard";
    auto* sw = app.add_subcommand("sweep", "full SL2 pipeline over the (h, e, k) grid as CSV");
    sw->add_option("--p", sw_p)->required();
    sw->add_option("--c", sw_c)->capture_default_str();
    sw->add_option("--a", sw_a)->required();
    sw->add_option("--h", sw_h)->capture_default_str();
    sw->add_option("--e", sw_e)->capture_default_str();
    sw->add_option("--k", sw_k, "cutoffs (default: three starting at max(2, 1-c))");
    sw->add_option("--model", sw_model)->check(CLI::IsMember({"standard", "nadic"}))->capture_default_str();
    sw->callback([&] {
        action = [&] {
            SweepGrid grid{parse_longs(sw_h), parse_longs(sw_e), parse_longs(sw_k)};
            auto res = ncharacter_sweep_sl2(sw_p, sw_c, parse_rational(sw_a), grid, sw_model == "nadic");
            std::cout << sweep_csv_header() << "\n";
            bool ok = res.limit_certified;
            for (const auto& r : res.rows) {
                std::cout << sweep_csv_row(r) << "\n";
                ok = ok && r.trace_ok;
            }
            check(ok, "trace or k-limit check failed");
        };
    });

    // verify
    std::string vf_suite;
    auto* vf = app.add_subcommand("verify", "run verification suites");
    vf->add_option("suite", vf_suite)->required()->check([](const std::string& s) {
        auto names = verify::suite_names();
        if (s == "all" || std::find(names.begin(), names.end(), s) != names.end()) return std::string();
        std::string list = "all";
        for (const auto& n : names) list += ", " + n;
        return "unknown suite (" + list + ")";
    });
    vf->callback([&] {
        action = [&] {
            bool ok = true;
            for (const auto& c : verify::criteria()) {
                if (vf_suite != "all" && c.suite != vf_suite) continue;
                auto r = verify::run_criterion(c, g.seed);
                std::cout << verify::format_report(r) << "\n";
                ok = ok && r.pass();
            }
            check(ok, "verification failed");
        };
    });

    try {
        app.parse(argc, argv);
        g.format = format == "csv" ? Format::Csv : format == "json" ? Format::Json : Format::Table;
        action();
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const IdentityFailure& e) {
        std::cerr << "identity failed: " << e.what() << "\n";
        return 1;
    } catch (const NotStabilized& e) {
        std::cerr << "identity failed: " << e.what() << "\n";
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
