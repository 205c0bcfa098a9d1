#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <vector>

namespace fgo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Dense row-major image, `channels` interleaved doubles per pixel.
/// Color images use 3 channels in [0,1]; depth maps use 1 channel in meters
/// with 0 marking invalid pixels.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 1;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {}

    double& at(int y, int x, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    Vec3 rgb(int y, int x) const {
        const size_t i = (static_cast<size_t>(y) * width + x) * channels;
        return Vec3(data[i], data[i + 1], data[i + 2]);
    }
    void set_rgb(int y, int x, const Vec3& v) {
        const size_t i = (static_cast<size_t>(y) * width + x) * channels;
        data[i] = v.x();
        data[i + 1] = v.y();
        data[i + 2] = v.z();
    }
    size_t size() const { return data.size(); }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

}  // namespace fgo
