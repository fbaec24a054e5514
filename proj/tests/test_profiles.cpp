#include "cvilab/cluster.hpp"
#include "cvilab/error.hpp"
#include "cvilab/profiles.hpp"
#include "cvilab/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

using namespace cvilab;

namespace {

std::string stamp(int day, int slot) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "2019-03-%02dT%02d:%02d:00", day + 1, slot / 4, (slot % 4) * 15);
    return buf;
}

std::string full_days(const std::string& id, int days, Rng& rng, std::map<int, std::vector<double>>& by_slot) {
    std::ostringstream out;
    for (int day = 0; day < days; ++day) {
        for (int s = 0; s < kSlotsPerDay; ++s) {
            const double v = std::round(rng.uniform() * 1000.0) / 100.0;
            by_slot[s].push_back(v);
            out << id << ',' << stamp(day, s) << ',' << v << '\n';
        }
    }
    return out.str();
}

}  // namespace

TEST_CASE("timestamps") {
    CHECK(parse_timestamp("1970-01-01T00:00") == 0);
    CHECK(parse_timestamp("1970-01-02 00:15:00") == 24 * 60 + 15);
    CHECK(parse_timestamp("1970-01-01T01:30:00.000Z") == 90);
    CHECK(parse_timestamp("1970-01-01T01:30:00-06:00") == 90);
    CHECK(parse_timestamp("2000-03-01T00:00") - parse_timestamp("2000-02-28T00:00") == 2 * 24 * 60);
    CHECK_THROWS_AS(parse_timestamp("1970-01-01T00:10"), InvalidArgument);
    CHECK_THROWS_AS(parse_timestamp("1970-02-30T00:00"), InvalidArgument);
    CHECK_THROWS_AS(parse_timestamp("yesterday"), InvalidArgument);
}

TEST_CASE("reading ingestion") {
    std::istringstream two("household_id,timestamp,kw\nA,2019-01-01T00:15,1.5\nA,2019-01-01T00:00,2\n");
    const auto series = parse_readings(two);
    REQUIRE(series.size() == 1);
    CHECK(series[0].household_id == "A");
    REQUIRE(series[0].samples.size() == 2);
    CHECK(series[0].samples[0].kw == 2.0);
    CHECK(series[0].samples[1].minute - series[0].samples[0].minute == 15);

    auto line_of = [](const std::string& text) {
        std::istringstream in(text);
        try {
            parse_readings(in);
        } catch (const ParseError& e) {
            return e.line();
        }
        return std::size_t{0};
    };
    CHECK(line_of("household_id,timestamp,kw\nA,2019-01-01T00:00,1\nA,2019-01-01T00:15,-1.0\n") == 3);
    CHECK(line_of("household_id,timestamp,kw\nA,2019-01-01T00:00,nan\n") == 2);
    CHECK(line_of("household_id,timestamp,kw\nA,2019-01-01T00:00\n") == 2);
    CHECK(line_of("household_id,timestamp,kw\nA,2019-01-01T00:00,1\nA,2019-01-01T00:00,2\n") == 3);
    CHECK(line_of("id,ts,kw\n") == 1);
}

TEST_CASE("many households come back grouped and sorted") {
    Rng rng(6);
    std::vector<std::string> lines;
    std::map<std::string, std::size_t> counts;
    for (int h = 0; h < 50; ++h) {
        const std::string id = "h" + std::to_string(h);
        for (int day = 0; day < 4; ++day)
            for (int s = 0; s < kSlotsPerDay; ++s) {
                lines.push_back(id + "," + stamp(day, s) + ",1");
                ++counts[id];
            }
    }
    for (std::size_t i = lines.size() - 1; i > 0; --i) std::swap(lines[i], lines[rng.below(i + 1)]);
    std::string text = "household_id,timestamp,kw\n";
    for (const auto& l : lines) text += l + "\n";
    std::istringstream in(text);
    const auto series = parse_readings(in);
    CHECK(series.size() == 50);
    for (const auto& s : series) {
        CHECK(s.samples.size() == counts[s.household_id]);
        CHECK(std::is_sorted(s.samples.begin(), s.samples.end(),
                             [](const Sample& a, const Sample& b) { return a.minute < b.minute; }));
    }
}

TEST_CASE("median daily profile") {
    Rng rng(12);
    std::map<int, std::vector<double>> by_slot;
    std::istringstream in("household_id,timestamp,kw\n" + full_days("H", 7, rng, by_slot));
    const auto series = parse_readings(in);
    const auto median = median_daily_profile(series[0]);
    REQUIRE(median.size() == kSlotsPerDay);
    for (int s = 0; s < kSlotsPerDay; ++s) {
        auto v = by_slot[s];
        std::sort(v.begin(), v.end());
        CHECK(median[static_cast<std::size_t>(s)] == v[3]);
    }

    std::map<int, std::vector<double>> one_day;
    std::istringstream single("household_id,timestamp,kw\n" + full_days("S", 1, rng, one_day));
    const auto verbatim = median_daily_profile(parse_readings(single)[0]);
    for (int s = 0; s < kSlotsPerDay; ++s) CHECK(verbatim[static_cast<std::size_t>(s)] == one_day[s][0]);

    ReadingSeries even{"E", {}};
    for (int day = 0; day < 2; ++day)
        for (int s = 0; s < kSlotsPerDay; ++s)
            even.samples.push_back({day * 1440 + s * 15, s == 0 ? (day == 0 ? 1.0 : 3.0) : 1.0});
    CHECK(median_daily_profile(even)[0] == 2.0);

    ReadingSeries gap{"G", {{0, 1.0}}};
    CHECK_THROWS_AS(median_daily_profile(gap), InvalidArgument);
}

TEST_CASE("median is invariant to day order") {
    ReadingSeries a{"A", {}};
    ReadingSeries b{"A", {}};
    Rng rng(3);
    std::vector<std::vector<double>> days(5, std::vector<double>(kSlotsPerDay));
    for (auto& d : days)
        for (auto& v : d) v = rng.uniform();
    for (int day = 0; day < 5; ++day)
        for (int s = 0; s < kSlotsPerDay; ++s) {
            a.samples.push_back({day * 1440 + s * 15, days[static_cast<std::size_t>(day)][static_cast<std::size_t>(s)]});
            b.samples.push_back({day * 1440 + s * 15, days[static_cast<std::size_t>(4 - day)][static_cast<std::size_t>(s)]});
        }
    CHECK(median_daily_profile(a) == median_daily_profile(b));
}

TEST_CASE("l2 normalisation") {
    std::vector<double> v(kSlotsPerDay, 0.0);
    v[0] = 3.0;
    v[1] = 4.0;
    const auto n = l2_normalize(v);
    CHECK(n[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(n[1] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(n[2] == 0.0);
    const auto again = l2_normalize(n);
    for (std::size_t i = 0; i < n.size(); ++i) CHECK(std::abs(again[i] - n[i]) < 1e-12);

    Rng rng(4);
    std::vector<double> r(kSlotsPerDay);
    for (auto& x : r) x = rng.uniform() * 10.0 + 0.01;
    const auto u = l2_normalize(r);
    double dot = 0.0;
    for (double x : u) dot += x * x;
    CHECK(std::abs(dot - 1.0) < 1e-9);
    std::vector<double> scaled = r;
    for (auto& x : scaled) x *= 37.5;
    const auto us = l2_normalize(scaled);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(us[i] - u[i]) < 1e-12);

    CHECK_THROWS_AS(l2_normalize(std::vector<double>(kSlotsPerDay, 0.0)), DegenerateInput);
}

TEST_CASE("profile CSV round trip") {
    const auto data = generate_synthetic(uniform_synth_spec(2, 3, 0.05, 1, 8));
    std::stringstream buf;
    write_profiles_csv(buf, data.profiles);
    std::string header;
    std::getline(buf, header);
    CHECK(header.rfind("household_id,t0000,t0015,", 0) == 0);
    CHECK(header.substr(header.size() - 6) == ",t2345");
    buf.seekg(0);
    const ProfileMatrix back = read_profiles_csv(buf);
    CHECK(back.ids() == data.profiles.ids());
    CHECK((back.values() - data.profiles.values()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("synthetic generator") {
    SynthSpec spec = uniform_synth_spec(3, 5, 0.0, 0, 1);
    const auto flat = generate_synthetic(spec);
    CHECK(flat.profiles.size() == 15);
    for (int c = 0; c < 3; ++c)
        for (int i = 1; i < 5; ++i) CHECK(flat.profiles.values().row(c * 5 + i) == flat.profiles.values().row(c * 5));

    const auto spec2 = uniform_synth_spec(4, 20, 0.05, 2, 99);
    const auto a = generate_synthetic(spec2);
    const auto b = generate_synthetic(spec2);
    CHECK(a.profiles == b.profiles);
    CHECK(a.truth == b.truth);
    CHECK(a.truth.back() == 5);
    for (Eigen::Index i = 0; i < a.profiles.size(); ++i) {
        CHECK(std::abs(a.profiles.values().row(i).norm() - 1.0) < 1e-9);
        CHECK(a.profiles.values().row(i).minCoeff() >= 0.0);
    }
    CHECK(a.profiles.dimension() == kSlotsPerDay);

    SynthSpec wild = uniform_synth_spec(1, 3, 0.0, 0, 2);
    for (auto& v : wild.clusters[0].profile_template) v = -1.0;
    CHECK_THROWS_AS(generate_synthetic(wild), DegenerateInput);
}

TEST_CASE("clustering recovers the synthetic ground truth") {
    const auto data = generate_synthetic(uniform_synth_spec(9, 222, 0.02, 0, 5));
    FcmConfig cfg;
    cfg.k = 9;
    cfg.seed = 3;
    const ClusterModel model = fit_fcm(data.profiles.values(), cfg);
    // Best one-to-one matching of predicted to true labels.
    std::map<std::pair<int, int>, int> table;
    for (std::size_t i = 0; i < model.labels.size(); ++i) ++table[{model.labels[i], data.truth[i]}];
    std::map<int, int> owner;
    int agree = 0;
    for (int t = 0; t < 9; ++t) {
        int best = -1;
        int count = 0;
        for (int p = 0; p < 9; ++p) {
            const auto it = table.find({p, t});
            if (it != table.end() && it->second > count) {
                count = it->second;
                best = p;
            }
        }
        CHECK(owner.count(best) == 0);
        owner[best] = t;
        agree += count;
    }
    CHECK(static_cast<double>(agree) / static_cast<double>(model.labels.size()) >= 0.99);
}
