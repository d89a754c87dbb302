#include "ftrl/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ftrl {

namespace {

constexpr char kMagic[5] = {'F', 'T', 'R', 'L', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& buf, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(buf, bits);
}

class Reader {
public:
    Reader(const std::string& path, std::string bytes) : path_(path), bytes_(std::move(bytes)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    std::string str(std::size_t len) {
        need(len);
        std::string s = bytes_.substr(pos_, len);
        pos_ += len;
        return s;
    }

    std::size_t pos() const { return pos_; }
    bool exhausted() const { return pos_ == bytes_.size(); }

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::runtime_error("corrupt checkpoint " + path_ + " at byte offset " +
                                 std::to_string(pos_) + ": " + msg);
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) fail("truncated (need " + std::to_string(n) + " more bytes)");
    }
    std::string path_;
    std::string bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& tensors) {
    std::string buf;
    buf.append(kMagic, 5);
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(tensors.size()));
    for (const NamedTensor& t : tensors) {
        put_u32(buf, static_cast<std::uint32_t>(t.name.size()));
        buf.append(t.name);
        put_u32(buf, static_cast<std::uint32_t>(t.value.rank()));
        for (std::size_t d : t.value.shape()) put_u32(buf, static_cast<std::uint32_t>(d));
        for (double v : t.value.flat()) put_f32(buf, static_cast<float>(v));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

std::vector<NamedTensor> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r(path, std::move(bytes));
    if (r.str(5) != std::string(kMagic, 5)) r.fail("bad magic");
    const std::uint32_t version = r.u32();
    if (version != kVersion) r.fail("unsupported format version " + std::to_string(version));
    const std::uint32_t count = r.u32();
    std::vector<NamedTensor> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor t;
        t.name = r.str(r.u32());
        const std::uint32_t rank = r.u32();
        std::vector<std::size_t> shape;
        std::size_t numel = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            const std::uint32_t dim = r.u32();
            if (dim == 0) r.fail("zero dimension");
            shape.push_back(dim);
            numel *= dim;
        }
        std::vector<double> data(numel);
        for (std::size_t j = 0; j < numel; ++j) data[j] = static_cast<double>(r.f32());
        t.value = Tensor(std::move(shape), std::move(data));
        out.push_back(std::move(t));
    }
    if (!r.exhausted()) r.fail("trailing bytes");
    return out;
}

namespace {

constexpr const char* kEncoderMeta = "meta.encoder";

}  // namespace

void save_encoder(const std::string& path, Graph& encoder, const EncoderConfig& cfg) {
    std::vector<NamedTensor> tensors;
    std::vector<double> meta{static_cast<double>(cfg.kind == EncoderKind::CompactConv ? 0 : 1),
                             static_cast<double>(cfg.embedding_dim),
                             static_cast<double>(cfg.in_channels),
                             static_cast<double>(cfg.in_height),
                             static_cast<double>(cfg.in_width)};
    for (std::size_t w : cfg.widths) meta.push_back(static_cast<double>(w));
    tensors.push_back({kEncoderMeta, Tensor({meta.size()}, meta)});
    for (Parameter* p : encoder.parameters()) tensors.push_back({p->name, p->value});
    for (auto& [name, buf] : encoder.buffers()) tensors.push_back({name, *buf});
    save_checkpoint(path, tensors);
}

std::pair<Graph, EncoderConfig> load_encoder(const std::string& path) {
    const std::vector<NamedTensor> tensors = load_checkpoint(path);
    const NamedTensor* meta = nullptr;
    for (const NamedTensor& t : tensors)
        if (t.name == kEncoderMeta) meta = &t;
    if (!meta || meta->value.numel() < 6)
        throw std::runtime_error("checkpoint " + path + " carries no encoder description");
    EncoderConfig cfg;
    cfg.kind = meta->value[0] == 0.0 ? EncoderKind::CompactConv : EncoderKind::ResidualSmall;
    cfg.embedding_dim = static_cast<std::size_t>(meta->value[1]);
    cfg.in_channels = static_cast<std::size_t>(meta->value[2]);
    cfg.in_height = static_cast<std::size_t>(meta->value[3]);
    cfg.in_width = static_cast<std::size_t>(meta->value[4]);
    cfg.widths.clear();
    for (std::size_t i = 5; i < meta->value.numel(); ++i)
        cfg.widths.push_back(static_cast<std::size_t>(meta->value[i]));
    Graph encoder = build_encoder(cfg);
    for (Parameter* p : encoder.parameters()) {
        bool found = false;
        for (const NamedTensor& t : tensors) {
            if (t.name != p->name) continue;
            if (!t.value.same_shape(p->value))
                throw std::runtime_error("checkpoint tensor " + t.name + " shape mismatch");
            p->value = t.value;
            found = true;
        }
        if (!found) throw std::runtime_error("checkpoint missing tensor " + p->name);
    }
    for (auto& [name, buf] : encoder.buffers()) {
        for (const NamedTensor& t : tensors) {
            if (t.name != name) continue;
            if (!t.value.same_shape(*buf))
                throw std::runtime_error("checkpoint tensor " + t.name + " shape mismatch");
            *buf = t.value;
        }
    }
    return {std::move(encoder), cfg};
}

}  // namespace ftrl
