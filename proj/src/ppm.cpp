#include "vvb/ppm.hpp"

#include <string>

#include "vvb/bytes.hpp"
#include "vvb/errors.hpp"

namespace vvb {

void write_ppm(const RGBImage& img, const std::filesystem::path& path) {
    const int res = img.resolution;
    if (res <= 0 || img.rgb.size() != static_cast<std::size_t>(res) * res * 3)
        throw ShapeError("RGB buffer does not match the image resolution");
    ByteWriter w;
    w.str("P6\n" + std::to_string(res) + " " + std::to_string(res) + "\n255\n");
    for (int i = res - 1; i >= 0; --i)
        w.bytes(img.rgb.data() + static_cast<std::size_t>(i) * res * 3,
                static_cast<std::size_t>(res) * 3);
    write_file_atomic(path, w.data());
}

} // namespace vvb
