#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "drive4d/alignment.hpp"
#include "drive4d/cli.hpp"
#include "drive4d/error.hpp"
#include "drive4d/evaluation.hpp"
#include "drive4d/geometry.hpp"
#include "drive4d/scene_io.hpp"
#include "drive4d/synth.hpp"

namespace py = pybind11;
using namespace drive4d;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_python(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

// (H, W, 3) uint8 array.
ColorImage color_from(const U8Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("expected an (H, W, 3) uint8 array");
  ColorImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(img.data.data(), a.data(), img.data.size());
  return img;
}

GrayImage gray_from(const U8Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected an (H, W) uint8 array");
  GrayImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(img.data.data(), a.data(), img.data.size());
  return img;
}

// (N, 3) float64 array.
std::vector<Point3> points_from(const F64Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw py::value_error("expected an (N, 3) array");
  std::vector<Point3> out(static_cast<std::size_t>(a.shape(0)));
  const double* p = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {p[3 * i], p[3 * i + 1], p[3 * i + 2]};
  return out;
}

F64Array points_to(const std::vector<Point3>& pts) {
  F64Array out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
  double* p = out.mutable_data();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    p[3 * i] = pts[i].x();
    p[3 * i + 1] = pts[i].y();
    p[3 * i + 2] = pts[i].z();
  }
  return out;
}

Vec3 vec3_from(const std::array<double, 3>& v) { return {v[0], v[1], v[2]}; }
std::array<double, 3> vec3_to(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

PYBIND11_MODULE(_drive4d, m) {
  m.doc() = "4D driving-scene reconstruction and controllable keyframe rendering";

  static py::exception<Error> error_type(m, "Drive4dError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // args = (kind, message)
      const py::object type = py::reinterpret_borrow<py::object>(error_type);
      const py::object inst = type(std::string(to_string(e.kind())), std::string(e.what()));
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::class_<CameraIntrinsics>(m, "Intrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy, int width, int height) {
             CameraIntrinsics k{fx, fy, cx, cy, width, height};
             k.validate();
             return k;
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"), py::arg("height"))
      .def_readonly("fx", &CameraIntrinsics::fx)
      .def_readonly("fy", &CameraIntrinsics::fy)
      .def_readonly("cx", &CameraIntrinsics::cx)
      .def_readonly("cy", &CameraIntrinsics::cy)
      .def_readonly("width", &CameraIntrinsics::width)
      .def_readonly("height", &CameraIntrinsics::height)
      .def("__repr__", [](const CameraIntrinsics& k) {
        return "Intrinsics(fx=" + std::to_string(k.fx) + ", fy=" + std::to_string(k.fy) + ", " +
               std::to_string(k.width) + "x" + std::to_string(k.height) + ")";
      });

  py::class_<RigidTransform>(m, "RigidTransform")
      .def(py::init<>())
      .def(py::init([](const std::array<double, 4>& q, const std::array<double, 3>& t) {
             return RigidTransform(q[0], q[1], q[2], q[3], vec3_from(t));
           }),
           py::arg("quaternion_wxyz"), py::arg("translation"))
      .def_static("from_rotation_vector",
                  [](const std::array<double, 3>& r, const std::array<double, 3>& t) {
                    return RigidTransform::from_rotation_vector(vec3_from(r), vec3_from(t));
                  },
                  py::arg("rotvec"), py::arg("translation") = std::array<double, 3>{0, 0, 0})
      .def_static("from_matrix",
                  [](const F64Array& h) {
                    if (h.ndim() != 2 || h.shape(0) != 4 || h.shape(1) != 4) {
                      throw py::value_error("expected a 4x4 matrix");
                    }
                    Mat3 r;
                    Vec3 t;
                    for (int i = 0; i < 3; ++i) {
                      for (int j = 0; j < 3; ++j) r(i, j) = h.at(i, j);
                      t[i] = h.at(i, 3);
                    }
                    return RigidTransform::from_matrix(r, t);
                  })
      .def_property_readonly("quaternion",
                             [](const RigidTransform& t) {
                               const auto& q = t.rotation();
                               return std::array<double, 4>{q.w(), q.x(), q.y(), q.z()};
                             })
      .def_property_readonly("translation", [](const RigidTransform& t) { return vec3_to(t.translation()); })
      .def_property_readonly("rotation_angle", &RigidTransform::rotation_angle)
      .def("matrix",
           [](const RigidTransform& t) {
             const Eigen::Matrix4d h = t.matrix();
             F64Array out({4, 4});
             for (int i = 0; i < 4; ++i)
               for (int j = 0; j < 4; ++j) out.mutable_at(i, j) = h(i, j);
             return out;
           })
      .def("apply", [](const RigidTransform& t, const F64Array& pts) {
        std::vector<Point3> p = points_from(pts);
        for (auto& q : p) q = t.apply(q);
        return points_to(p);
      })
      .def("inverse", &RigidTransform::inverse)
      .def("__mul__", [](const RigidTransform& a, const RigidTransform& b) { return a * b; });

  m.def("project",
        [](const CameraIntrinsics& k, const std::array<double, 3>& p) {
          const Projection q = project(k, vec3_from(p));
          return py::make_tuple(q.u, q.v, q.depth);
        },
        py::arg("intrinsics"), py::arg("point_cam"), "Pinhole projection to (u, v, depth).");
  m.def("lift",
        [](const CameraIntrinsics& k, double u, double v, double d) { return vec3_to(lift(k, u, v, d)); },
        py::arg("intrinsics"), py::arg("u"), py::arg("v"), py::arg("depth"));
  m.def("rigid_solve",
        [](const F64Array& src, const F64Array& dst) { return rigid_solve(points_from(src), points_from(dst)); },
        py::arg("source"), py::arg("target"), "Least-squares rigid transform mapping source onto target.");

  m.def("psnr",
        [](const U8Array& a, const U8Array& b, std::optional<U8Array> mask) {
          const ColorImage ia = color_from(a), ib = color_from(b);
          if (!mask) return psnr(ia, ib);
          const GrayImage g = gray_from(*mask);
          return psnr(ia, ib, &g);
        },
        py::arg("a"), py::arg("b"), py::arg("mask") = py::none());
  m.def("ssim", [](const U8Array& a, const U8Array& b) { return ssim(color_from(a), color_from(b)); },
        py::arg("a"), py::arg("b"));
  m.def("evaluate_sequence",
        [](const std::filesystem::path& r, const std::filesystem::path& g, bool masked) {
          return to_python(evaluate_sequence(r, g, masked).to_json());
        },
        py::arg("render_dir"), py::arg("gt_dir"), py::arg("masked") = false);

  m.def("load_cloud",
        [](const std::filesystem::path& path) {
          py::list frames;
          for (const auto& f : load_cloud(path)) {
            const auto n = static_cast<py::ssize_t>(f.size());
            py::array_t<float> xyz({n, py::ssize_t{3}});
            U8Array rgb({n, py::ssize_t{3}});
            U8Array flags(n);
            for (py::ssize_t i = 0; i < n; ++i) {
              const CloudPoint& p = f.points[static_cast<std::size_t>(i)];
              for (int c = 0; c < 3; ++c) {
                xyz.mutable_at(i, c) = p.position[c];
                rgb.mutable_at(i, c) = p.color[c];
              }
              flags.mutable_at(i) = p.flags;
            }
            py::dict d;
            d["frame"] = f.frame_index;
            d["xyz"] = xyz;
            d["rgb"] = rgb;
            d["flags"] = flags;
            frames.append(d);
          }
          return frames;
        },
        py::arg("path"), "Per-frame dicts with xyz (N,3) float32, rgb (N,3) uint8, flags (N,) uint8.");

  m.def("synth_generate",
        [](const py::dict& spec, const std::filesystem::path& out_dir) {
          const auto manifest = synth::generate(synth::spec_from_json(from_python(spec)), out_dir);
          return out_dir / "manifest.json";
        },
        py::arg("spec"), py::arg("out_dir"), "Writes a synthetic scene; returns the manifest path.");

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::vector<std::string> argv{"drive4d"};
          argv.insert(argv.end(), args.begin(), args.end());
          py::gil_scoped_release release;
          return cli::run(argv);
        },
        py::arg("args"), "Runs a command line (without the program name); returns the exit code.");

  m.attr("PSNR_CAP") = kPsnrCap;
}
