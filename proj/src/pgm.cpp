#include "gifs/render.hpp"

#include <fstream>

namespace gifs::render {

void write_image(const RasterImage& img, const std::string& path) {
    if (img.width < 1 || img.height < 1 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * img.height)
        throw config_error("write_image: malformed image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw std::runtime_error(path + ": write failed");
}

namespace {

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

}  // namespace

RasterImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    if (next_token(in) != "P5") throw std::runtime_error(path + ": not a binary graymap");
    RasterImage img;
    try {
        img.width = std::stoi(next_token(in));
        img.height = std::stoi(next_token(in));
        const int maxval = std::stoi(next_token(in));
        if (maxval != 255) throw std::runtime_error(path + ": expected maxval 255");
    } catch (const std::logic_error&) {
        throw std::runtime_error(path + ": malformed header");
    }
    if (img.width < 1 || img.height < 1) throw std::runtime_error(path + ": bad image size");
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw std::runtime_error(path + ": truncated pixel data");
    return img;
}

}  // namespace gifs::render
