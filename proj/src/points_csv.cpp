#include "hvgan/points_csv.hpp"

#include "hvgan/error.hpp"

#include <charconv>
#include <fstream>

namespace hvgan {

namespace {

    auto trim(std::string_view s) -> std::string_view
    {
        const auto first = s.find_first_not_of(" \t\r");
        if (first == std::string_view::npos) {
            return {};
        }
        const auto last = s.find_last_not_of(" \t\r");
        return s.substr(first, last - first + 1);
    }

    auto parse_fields(std::string_view line, std::size_t line_no) -> std::vector<double>
    {
        std::vector<double> values;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            const auto field = trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
            double v = 0.0;
            const auto* end = field.data() + field.size();
            const auto [ptr, ec] = std::from_chars(field.data(), end, v);
            if (field.empty() || ec != std::errc{} || ptr != end) {
                throw ValidationError("line " + std::to_string(line_no) + ": non-numeric field '"
                                      + std::string(field) + "'");
            }
            values.push_back(v);
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        return values;
    }

} // namespace

auto parse_points_csv(std::istream& in, Orientation orientation) -> PointSet
{
    PointSet set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty()) {
            continue;
        }
        auto values = parse_fields(body, line_no);
        if (!set.empty() && values.size() != set.dimension()) {
            throw ValidationError("line " + std::to_string(line_no) + ": ragged row with " + std::to_string(values.size())
                                  + " fields, expected " + std::to_string(set.dimension()));
        }
        try {
            set.push_back(ObjectiveVector(std::move(values), orientation));
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return set;
}

auto read_points_csv(const std::filesystem::path& path, Orientation orientation) -> PointSet
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open points file " + path.string());
    }
    return parse_points_csv(in, orientation);
}

auto parse_number_list(const std::string& text) -> std::vector<double>
{
    return parse_fields(trim(text), 1);
}

} // namespace hvgan
