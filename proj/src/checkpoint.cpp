#include "hvgan/error.hpp"
#include "hvgan/train.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace hvgan {

namespace {

    template <class T>
    void put(std::string& out, T v)
    {
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            out += static_cast<char>((v >> (8 * i)) & 0xff);
        }
    }

    class Reader {
    public:
        explicit Reader(const std::string& bytes) : bytes_(bytes) {}

        template <class T>
        auto get() -> T
        {
            need(sizeof(T));
            T v = 0;
            for (std::size_t i = 0; i < sizeof(T); ++i) {
                v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
            }
            pos_ += sizeof(T);
            return v;
        }

        auto take(std::size_t n) -> std::string
        {
            need(n);
            std::string s = bytes_.substr(pos_, n);
            pos_ += n;
            return s;
        }

        [[nodiscard]] auto done() const -> bool { return pos_ == bytes_.size(); }

    private:
        void need(std::size_t n) const
        {
            if (bytes_.size() - pos_ < n) {
                throw ValidationError("checkpoint is truncated");
            }
        }

        const std::string& bytes_;
        std::size_t pos_ = 0;
    };

    auto all_parameters(Networks& nets) -> std::vector<Parameter*>
    {
        auto ps = nets.g.parameters();
        for (Parameter* p : nets.d.parameters()) {
            ps.push_back(p);
        }
        return ps;
    }

} // namespace

auto checkpoint_bytes(const Networks& nets) -> std::string
{
    auto ps = nets.g.parameters();
    for (const Parameter* p : nets.d.parameters()) {
        ps.push_back(p);
    }
    std::string out = "HVGN";
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, ps.size());
    for (const Parameter* p : ps) {
        put<std::uint16_t>(out, static_cast<std::uint16_t>(p->name.size()));
        out += p->name;
        put<std::uint8_t>(out, static_cast<std::uint8_t>(p->value.rank()));
        for (std::size_t e : p->value.shape()) {
            put<std::uint64_t>(out, e);
        }
        for (double v : p->value.data()) {
            put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    return out;
}

auto parse_checkpoint(const std::string& bytes) -> std::vector<Parameter>
{
    Reader in(bytes);
    if (in.take(4) != "HVGN") {
        throw ValidationError("not a checkpoint (bad magic)");
    }
    if (const auto version = in.get<std::uint32_t>(); version != kCheckpointVersion) {
        throw ValidationError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto count = in.get<std::uint64_t>();
    std::vector<Parameter> params;
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string name = in.take(in.get<std::uint16_t>());
        Shape shape(in.get<std::uint8_t>());
        for (auto& e : shape) {
            e = in.get<std::uint64_t>();
        }
        Tensor t(shape);
        for (double& v : t.data()) {
            v = std::bit_cast<double>(in.get<std::uint64_t>());
        }
        params.emplace_back(std::move(name), std::move(t));
    }
    if (!in.done()) {
        throw ValidationError("checkpoint has trailing bytes");
    }
    return params;
}

void restore(Networks& nets, const std::vector<Parameter>& params)
{
    std::map<std::string, const Parameter*> by_name;
    for (const Parameter& p : params) {
        by_name[p.name] = &p;
    }
    for (Parameter* p : all_parameters(nets)) {
        const auto it = by_name.find(p->name);
        if (it == by_name.end()) {
            throw ValidationError("checkpoint lacks parameter " + p->name);
        }
        if (it->second->value.shape() != p->value.shape()) {
            throw ValidationError("checkpoint parameter " + p->name + " has shape " + to_string(it->second->value.shape())
                                  + ", expected " + to_string(p->value.shape()));
        }
        p->value = it->second->value;
    }
}

auto fnv1a64(std::string_view bytes) -> std::uint64_t
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_file(const std::filesystem::path& path, const std::string& contents)
{
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out || !out.write(contents.data(), static_cast<std::streamsize>(contents.size())).flush()) {
            throw IoError("cannot write " + path.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot write " + path.string() + ": " + ec.message());
    }
}

auto read_file(const std::filesystem::path& path) -> std::string
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace hvgan
