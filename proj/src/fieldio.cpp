#include "lsvcal/fieldio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lsv {

namespace {
void put(std::ostream& os, double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    os << buf;
}
}  // namespace

void save_field(const Grid3Field& f, const Grid2D& g, double dt, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write field file: " + path);
    out << "lsvfield 1\n";
    out << "tag " << f.tag << "\n";
    out << "dims " << f.n_slices << ' ' << f.nz << ' ' << f.nv << "\n";
    out << "dt ";
    put(out, dt);
    out << "\nzaxis";
    for (int i = 0; i < g.nz; ++i) {
        out << ' ';
        put(out, g.z[i]);
    }
    out << "\nvaxis";
    for (int j = 0; j < g.nv; ++j) {
        out << ' ';
        put(out, g.v[j]);
    }
    out << "\ndata\n";
    for (int k = 0; k < f.n_slices; ++k) {
        const double* s = f.slice(k);
        for (int i = 0; i < f.nz; ++i) {
            for (int j = 0; j < f.nv; ++j) {
                if (j) out << ' ';
                put(out, s[static_cast<std::size_t>(i) * f.nv + j]);
            }
            out << '\n';
        }
    }
}

FieldFile load_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open field file: " + path);
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "lsvfield" || version != 1)
        throw input_error("field file " + path + ": bad magic header");

    FieldFile ff;
    int ns = 0, nz = 0, nv = 0;
    if (!(in >> word) || word != "tag" || !(in >> ff.field.tag))
        throw input_error("field file " + path + ": missing tag");
    if (!(in >> word) || word != "dims" || !(in >> ns >> nz >> nv) || ns < 1 || nz < 1 || nv < 1)
        throw input_error("field file " + path + ": bad dims");
    if (!(in >> word) || word != "dt" || !(in >> ff.dt))
        throw input_error("field file " + path + ": bad dt");
    if (!(in >> word) || word != "zaxis")
        throw input_error("field file " + path + ": missing zaxis");
    ff.zaxis.resize(nz);
    for (int i = 0; i < nz; ++i)
        if (!(in >> ff.zaxis[i])) throw input_error("field file " + path + ": truncated zaxis");
    if (!(in >> word) || word != "vaxis")
        throw input_error("field file " + path + ": missing vaxis");
    ff.vaxis.resize(nv);
    for (int j = 0; j < nv; ++j)
        if (!(in >> ff.vaxis[j])) throw input_error("field file " + path + ": truncated vaxis");
    if (!(in >> word) || word != "data")
        throw input_error("field file " + path + ": missing data section");

    std::string tag = ff.field.tag;
    ff.field = Grid3Field(tag, ns, nz, nv);
    for (std::size_t n = 0; n < ff.field.data.size(); ++n)
        if (!(in >> ff.field.data[n]))
            throw input_error("field file " + path + ": truncated data section");
    return ff;
}

void check_field_matches(const FieldFile& ff, const Grid2D& g, double dt) {
    if (ff.field.nz != g.nz || ff.field.nv != g.nv)
        throw input_error("field dimensions (" + std::to_string(ff.field.nz) + "x" +
                          std::to_string(ff.field.nv) + ") do not match the grid (" +
                          std::to_string(g.nz) + "x" + std::to_string(g.nv) + ")");
    if (std::abs(ff.dt - dt) > 1e-12 * std::max(1.0, dt))
        throw input_error("field dt does not match the time grid");
    for (int i = 0; i < g.nz; ++i)
        if (std::abs(ff.zaxis[i] - g.z[i]) > 1e-12)
            throw input_error("field z axis does not match the grid");
    for (int j = 0; j < g.nv; ++j)
        if (std::abs(ff.vaxis[j] - g.v[j]) > 1e-12)
            throw input_error("field v axis does not match the grid");
}

}  // namespace lsv
