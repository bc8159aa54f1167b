#include "vpflow/snapshot.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace vpflow {

namespace {

constexpr char kMagic[8] = {'V', 'P', 'F', 'L', 'O', 'W', '0', '1'};

void put_u32(char* p, std::uint32_t x) { std::memcpy(p, &x, 4); }
void put_f64(char* p, double x) { std::memcpy(p, &x, 8); }
std::uint32_t get_u32(const char* p) {
    std::uint32_t x;
    std::memcpy(&x, p, 4);
    return x;
}
double get_f64(const char* p) {
    double x;
    std::memcpy(&x, p, 8);
    return x;
}

void write_array(std::ofstream& os, const Array3& a) {
    os.write(reinterpret_cast<const char*>(a.v.data()), static_cast<std::streamsize>(a.v.size() * sizeof(double)));
}

void read_array(std::ifstream& is, Array3& a) {
    is.read(reinterpret_cast<char*>(a.v.data()), static_cast<std::streamsize>(a.v.size() * sizeof(double)));
    if (!is) throw std::runtime_error("snapshot: truncated field data");
}

}  // namespace

void write_snapshot(const std::string& path, const SimState& state) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("snapshot: cannot open for writing: " + path);
    const Grid& g = state.V.grid;
    char header[64] = {};
    std::memcpy(header, kMagic, 8);
    put_u32(header + 8, static_cast<std::uint32_t>(g.n[0]));
    put_u32(header + 12, static_cast<std::uint32_t>(g.n[1]));
    put_u32(header + 16, static_cast<std::uint32_t>(g.n[2]));
    for (int a = 0; a < 3; ++a) header[20 + a] = g.periodic(a) ? 0 : 1;
    put_f64(header + 24, g.h[0]);
    put_f64(header + 32, g.h[1]);
    put_f64(header + 40, g.h[2]);
    put_f64(header + 48, state.t);
    os.write(header, 64);
    for (int c = 0; c < 3; ++c) write_array(os, state.V.comp[c]);
    for (int c = 0; c < 5; ++c) write_array(os, state.S.coord[static_cast<std::size_t>(c)]);
    write_array(os, state.P.a);
    if (!os) throw std::runtime_error("snapshot: write failed: " + path);
}

SimState read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("snapshot: cannot open: " + path);
    char header[64];
    is.read(header, 64);
    if (!is || std::memcmp(header, kMagic, 8) != 0)
        throw std::runtime_error("snapshot: bad magic in " + path);
    Grid g;
    g.n = {static_cast<int>(get_u32(header + 8)), static_cast<int>(get_u32(header + 12)),
           static_cast<int>(get_u32(header + 16))};
    for (int a = 0; a < 3; ++a)
        g.topo[static_cast<std::size_t>(a)] = header[20 + a] == 0 ? Topology::Periodic : Topology::Wall;
    g.h = {get_f64(header + 24), get_f64(header + 32), get_f64(header + 40)};
    g.validate();
    SimState state(g);
    state.t = get_f64(header + 48);
    for (int c = 0; c < 3; ++c) read_array(is, state.V.comp[c]);
    for (int c = 0; c < 5; ++c) read_array(is, state.S.coord[static_cast<std::size_t>(c)]);
    read_array(is, state.P.a);
    return state;
}

}  // namespace vpflow
