#include "cvilab/profiles.hpp"

#include "cvilab/error.hpp"
#include "cvilab/rng.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace cvilab {

namespace {

constexpr int kMinutesPerDay = 24 * 60;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            return fields;
        }
        fields.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return ec == std::errc{};
}

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

ProfileMatrix::ProfileMatrix(std::vector<std::string> ids, Matrix values)
    : ids_(std::move(ids)), values_(std::move(values)) {
    if (static_cast<Eigen::Index>(ids_.size()) != values_.rows()) {
        throw InvalidArgument("profile matrix: id count does not match row count");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ids_) {
        if (!seen.insert(id).second) {
            throw InvalidArgument("profile matrix: duplicate household id '" + id + "'");
        }
    }
}

ProfileMatrix ProfileMatrix::from_profiles(const std::vector<DailyProfile>& rows) {
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    const std::size_t d = rows.empty() ? 0 : rows.front().values.size();
    Matrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].values.size() != d) {
            throw InvalidArgument("profile matrix: rows differ in length");
        }
        ids.push_back(rows[i].household_id);
        for (std::size_t c = 0; c < d; ++c) {
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i].values[c];
        }
    }
    return ProfileMatrix(std::move(ids), std::move(values));
}

std::int64_t parse_timestamp(std::string_view text) {
    const std::string_view s = trim(text);
    int year, month, day, hour, minute, second = 0;
    const auto bad = [&](const char* why) {
        return InvalidArgument("bad timestamp '" + std::string(s) + "': " + why);
    };
    if (s.size() < 16 || !parse_fixed_int(s, 0, 4, year) || s[4] != '-' ||
        !parse_fixed_int(s, 5, 2, month) || s[7] != '-' || !parse_fixed_int(s, 8, 2, day) ||
        (s[10] != 'T' && s[10] != ' ') || !parse_fixed_int(s, 11, 2, hour) || s[13] != ':' ||
        !parse_fixed_int(s, 14, 2, minute)) {
        throw bad("expected YYYY-MM-DDTHH:MM");
    }
    std::size_t pos = 16;
    if (pos < s.size() && s[pos] == ':') {
        if (!parse_fixed_int(s, pos + 1, 2, second)) throw bad("bad seconds");
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
                if (s[pos] != '0') throw bad("readings must fall on 15-minute boundaries");
                ++pos;
            }
        }
    }
    if (pos < s.size()) {
        const std::string_view zone = s.substr(pos);
        int zh = 0, zm = 0;
        const bool ok = zone == "Z" ||
                        ((zone[0] == '+' || zone[0] == '-') &&
                         ((zone.size() == 3 && parse_fixed_int(zone, 1, 2, zh)) ||
                          (zone.size() == 5 && parse_fixed_int(zone, 1, 2, zh) &&
                           parse_fixed_int(zone, 3, 2, zm)) ||
                          (zone.size() == 6 && parse_fixed_int(zone, 1, 2, zh) && zone[3] == ':' &&
                           parse_fixed_int(zone, 4, 2, zm))));
        if (!ok) throw bad("unrecognized zone suffix");
    }
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                             std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok()) throw bad("invalid calendar date");
    if (hour > 23 || minute > 59 || second > 59) throw bad("invalid time of day");
    if (second != 0 || minute % kMinutesPerSlot != 0) {
        throw bad("readings must fall on 15-minute boundaries");
    }
    const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
    return days * kMinutesPerDay + hour * 60 + minute;
}

std::vector<ReadingSeries> parse_readings(std::istream& csv) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(csv, line)) {
        ++line_no;
        if (!is_blank(line)) break;
    }
    if (line_no == 0 || is_blank(line)) {
        throw ParseError(line_no == 0 ? 1 : line_no, "missing header");
    }
    {
        std::string_view header = trim(line);
        if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
        if (split(header, ',') != std::vector<std::string_view>{"household_id", "timestamp", "kw"}) {
            throw ParseError(line_no, "expected header 'household_id,timestamp,kw'");
        }
    }

    struct Pending {
        std::vector<Sample> samples;
        std::vector<std::size_t> lines;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, Pending> groups;

    while (std::getline(csv, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 3) {
            throw ParseError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
        }
        if (fields[0].empty()) throw ParseError(line_no, "empty household_id");
        std::int64_t minute;
        try {
            minute = parse_timestamp(fields[1]);
        } catch (const InvalidArgument& e) {
            throw ParseError(line_no, e.what());
        }
        double kw;
        if (!parse_double(fields[2], kw)) {
            throw ParseError(line_no, "kw is not a number: '" + std::string(fields[2]) + "'");
        }
        if (!std::isfinite(kw)) throw ParseError(line_no, "kw is not finite");
        if (kw < 0.0) throw ParseError(line_no, "kw is negative");

        std::string id(fields[0]);
        auto [it, inserted] = groups.try_emplace(id);
        if (inserted) order.push_back(id);
        it->second.samples.push_back({minute, kw});
        it->second.lines.push_back(line_no);
    }

    std::vector<ReadingSeries> out;
    out.reserve(order.size());
    for (const auto& id : order) {
        Pending& g = groups.at(id);
        std::vector<std::size_t> idx(g.samples.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return g.samples[a].minute < g.samples[b].minute;
        });
        ReadingSeries series{id, {}};
        series.samples.reserve(idx.size());
        for (std::size_t n = 0; n < idx.size(); ++n) {
            if (n > 0 && g.samples[idx[n]].minute == g.samples[idx[n - 1]].minute) {
                const std::size_t dup_line = std::max(g.lines[idx[n]], g.lines[idx[n - 1]]);
                throw ParseError(dup_line, "duplicate reading for household '" + id + "'");
            }
            series.samples.push_back(g.samples[idx[n]]);
        }
        out.push_back(std::move(series));
    }
    return out;
}

std::vector<double> median_daily_profile(const ReadingSeries& series) {
    std::vector<std::vector<double>> slots(kSlotsPerDay);
    for (const Sample& s : series.samples) {
        std::int64_t minute_of_day = s.minute % kMinutesPerDay;
        if (minute_of_day < 0) minute_of_day += kMinutesPerDay;
        slots[static_cast<std::size_t>(minute_of_day / kMinutesPerSlot)].push_back(s.kw);
    }
    std::vector<double> profile(kSlotsPerDay);
    for (int slot = 0; slot < kSlotsPerDay; ++slot) {
        auto& v = slots[static_cast<std::size_t>(slot)];
        if (v.empty()) {
            throw InvalidArgument("household '" + series.household_id + "' has no readings for slot " +
                                  slot_label(slot));
        }
        const std::size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
        const double upper = v[mid];
        if (v.size() % 2 == 1) {
            profile[static_cast<std::size_t>(slot)] = upper;
        } else {
            const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
            profile[static_cast<std::size_t>(slot)] = (lower + upper) / 2.0;
        }
    }
    return profile;
}

std::vector<double> l2_normalize(std::span<const double> profile) {
    double sq = 0.0;
    for (double v : profile) {
        if (!std::isfinite(v)) throw InvalidArgument("l2_normalize: non-finite entry");
        sq += v * v;
    }
    if (sq == 0.0) {
        throw DegenerateInput("l2_normalize: all-zero profile cannot be normalized");
    }
    const double norm = std::sqrt(sq);
    std::vector<double> out(profile.size());
    std::transform(profile.begin(), profile.end(), out.begin(), [norm](double v) { return v / norm; });
    return out;
}

ProfileMatrix build_profile_matrix(const std::vector<ReadingSeries>& series) {
    std::vector<DailyProfile> rows;
    rows.reserve(series.size());
    for (const auto& s : series) {
        try {
            rows.push_back({s.household_id, l2_normalize(median_daily_profile(s))});
        } catch (const DegenerateInput&) {
            throw DegenerateInput("household '" + s.household_id + "' has an all-zero median profile");
        }
    }
    return ProfileMatrix::from_profiles(rows);
}

std::string slot_label(int slot) {
    char buf[16];
    const int minutes = slot * kMinutesPerSlot;
    std::snprintf(buf, sizeof buf, "t%02d%02d", minutes / 60, minutes % 60);
    return buf;
}

void write_profiles_csv(std::ostream& out, const ProfileMatrix& profiles) {
    out << "household_id";
    for (Eigen::Index c = 0; c < profiles.dimension(); ++c) {
        out << ',' << slot_label(static_cast<int>(c));
    }
    out << '\n';
    char buf[32];
    for (Eigen::Index r = 0; r < profiles.size(); ++r) {
        out << profiles.ids()[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < profiles.dimension(); ++c) {
            std::snprintf(buf, sizeof buf, "%.9g", profiles.values()(r, c));
            out << ',' << buf;
        }
        out << '\n';
    }
}

ProfileMatrix read_profiles_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(1, "missing header");
    ++line_no;
    const auto header = split(trim(line), ',');
    if (header.size() < 2 || header[0] != "household_id") {
        throw ParseError(line_no, "expected header 'household_id,t0000,...'");
    }
    const std::size_t d = header.size() - 1;
    std::vector<DailyProfile> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const auto fields = split(line, ',');
        if (fields.size() != d + 1) {
            throw ParseError(line_no, "expected " + std::to_string(d + 1) + " fields");
        }
        DailyProfile p{std::string(fields[0]), std::vector<double>(d)};
        for (std::size_t c = 0; c < d; ++c) {
            if (!parse_double(fields[c + 1], p.values[c]) || !std::isfinite(p.values[c])) {
                throw ParseError(line_no, "bad value in column " + std::string(header[c + 1]));
            }
        }
        rows.push_back(std::move(p));
    }
    try {
        return ProfileMatrix::from_profiles(rows);
    } catch (const InvalidArgument& e) {
        throw ParseError(line_no, e.what());
    }
}

std::vector<std::vector<double>> make_templates(int count, std::uint64_t seed) {
    if (count < 1) throw InvalidArgument("make_templates: count must be positive");
    Rng rng(seed);
    std::vector<std::vector<double>> templates;
    templates.reserve(static_cast<std::size_t>(count));
    const auto bump = [](double hour, double centre, double width) {
        const double z = (hour - centre) / width;
        return std::exp(-0.5 * z * z);
    };
    for (int t = 0; t < count; ++t) {
        const double base = 0.2 + 0.4 * rng.uniform();
        const double morning_at = 6.0 + 3.0 * rng.uniform();
        const double morning_amp = 0.3 + 1.7 * rng.uniform();
        const double evening_at = 17.0 + 4.0 * rng.uniform();
        const double evening_amp = 0.3 + 2.7 * rng.uniform();
        const double midday_amp = 1.5 * rng.uniform() * rng.uniform();
        const double width = 0.8 + 1.2 * rng.uniform();
        std::vector<double> profile(kSlotsPerDay);
        for (int slot = 0; slot < kSlotsPerDay; ++slot) {
            const double hour = slot * kMinutesPerSlot / 60.0;
            profile[static_cast<std::size_t>(slot)] =
                base + morning_amp * bump(hour, morning_at, width) +
                evening_amp * bump(hour, evening_at, 1.5 * width) + midday_amp * bump(hour, 13.0, 2.5);
        }
        templates.push_back(std::move(profile));
    }
    return templates;
}

SynthSpec uniform_synth_spec(int cluster_count, int cluster_size, double spread, int outlier_count,
                             std::uint64_t seed) {
    if (cluster_count < 1) throw InvalidArgument("synth: cluster count must be positive");
    SynthSpec spec;
    spec.seed = seed;
    spec.outlier_count = outlier_count;
    for (auto& t : make_templates(cluster_count, derive_seed(seed, 0x7e3b))) {
        spec.clusters.push_back({cluster_size, std::move(t), spread});
    }
    return spec;
}

namespace {

double vec_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Nonnegative direction of unit length.
std::vector<double> positive_direction(Rng& rng, std::size_t d) {
    std::vector<double> dir(d);
    double sq = 0.0;
    for (auto& v : dir) {
        v = std::abs(rng.normal());
        sq += v * v;
    }
    for (auto& v : dir) v /= std::sqrt(sq);
    return dir;
}

// Unit-length narrow bump centred on `slot`, wrapping around midnight.
std::vector<double> spike_direction(std::size_t slot, std::size_t d) {
    std::vector<double> dir(d);
    double sq = 0.0;
    for (std::size_t s = 0; s < d; ++s) {
        const double gap = static_cast<double>(std::min((s + d - slot) % d, (slot + d - s) % d));
        dir[s] = std::exp(-0.5 * gap * gap);
        sq += dir[s] * dir[s];
    }
    for (auto& v : dir) v /= std::sqrt(sq);
    return dir;
}

}  // namespace

SynthData generate_synthetic(const SynthSpec& spec) {
    if (spec.clusters.empty()) throw InvalidArgument("synth: cluster_count must be at least 1");
    if (spec.outlier_count < 0) throw InvalidArgument("synth: outlier_count must be nonnegative");
    const std::size_t d = spec.clusters.front().profile_template.size();
    if (d == 0) throw InvalidArgument("synth: empty template");
    for (const auto& c : spec.clusters) {
        if (c.size < 1) throw InvalidArgument("synth: cluster size must be positive");
        if (!(c.spread >= 0.0) || !std::isfinite(c.spread)) throw InvalidArgument("synth: spread must be >= 0");
        if (c.profile_template.size() != d) throw InvalidArgument("synth: templates differ in length");
    }

    Rng rng(spec.seed);
    std::vector<DailyProfile> rows;
    Labels truth;
    char id[48];
    for (std::size_t k = 0; k < spec.clusters.size(); ++k) {
        const SynthCluster& c = spec.clusters[k];
        for (int n = 0; n < c.size; ++n) {
            std::vector<double> raw(d);
            for (std::size_t s = 0; s < d; ++s) {
                raw[s] = std::max(0.0, c.profile_template[s] + c.spread * rng.normal());
            }
            std::snprintf(id, sizeof id, "c%02zu-%04d", k, n);
            try {
                rows.push_back({id, l2_normalize(raw)});
            } catch (const DegenerateInput&) {
                throw DegenerateInput("synth: spread clipped profile " + std::string(id) + " to all zeros");
            }
            truth.push_back(static_cast<int>(k));
        }
    }

    if (spec.outlier_count > 0) {
        std::vector<double> mean(d, 0.0);
        for (const auto& c : spec.clusters) {
            for (std::size_t s = 0; s < d; ++s) mean[s] += c.profile_template[s];
        }
        for (auto& v : mean) v /= static_cast<double>(spec.clusters.size());
        double max_sep = 0.0;
        double min_sep = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < spec.clusters.size(); ++a) {
            for (std::size_t b = a + 1; b < spec.clusters.size(); ++b) {
                const double dist = vec_distance(spec.clusters[a].profile_template, spec.clusters[b].profile_template);
                max_sep = std::max(max_sep, dist);
                min_sep = std::min(min_sep, dist);
            }
        }
        double norm_mean = 0.0;
        for (double v : mean) norm_mean += v * v;
        norm_mean = std::sqrt(norm_mean);
        if (max_sep == 0.0) max_sep = norm_mean;
        if (!std::isfinite(min_sep) || min_sep == 0.0) min_sep = max_sep;

        // Far: offset of 6x the max template separation from the template
        // mean, so every template is at least 5x away by the triangle
        // inequality. Each far outlier peaks at its own time of day, which
        // keeps the outliers apart from each other after normalization.
        // Near: a short offset from the template mean.
        const bool far = spec.placement == OutlierPlacement::far;
        const double offset = far ? 6.0 * max_sep : 0.25 * min_sep;
        const std::size_t first_slot = rng.below(d);
        for (int o = 0; o < spec.outlier_count; ++o) {
            const std::size_t slot = (first_slot + static_cast<std::size_t>(o) * d /
                                                       static_cast<std::size_t>(spec.outlier_count)) % d;
            const auto dir = far ? spike_direction(slot, d) : positive_direction(rng, d);
            std::vector<double> raw(d);
            for (std::size_t s = 0; s < d; ++s) raw[s] = mean[s] + offset * dir[s];
            std::snprintf(id, sizeof id, "o%02d", o);
            rows.push_back({id, l2_normalize(raw)});
            truth.push_back(static_cast<int>(spec.clusters.size()) + o);
        }
    }
    return {ProfileMatrix::from_profiles(rows), std::move(truth)};
}

}  // namespace cvilab
