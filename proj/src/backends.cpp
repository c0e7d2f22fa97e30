#include "dtwin/backends.hpp"

#include "dtwin/synthworld.hpp"

namespace dtwin {

template <class T>
std::unique_ptr<T> BackendRegistry::resolve(
    const std::map<std::string, Factory<T>>& m, const std::string& name,
    const char* category) {
    auto it = m.find(name);
    if (it == m.end()) {
        throw UnknownBackendError(std::string("no ") + category +
                                  " backend registered under '" + name + "'");
    }
    return it->second();
}

void BackendRegistry::register_pose_detector(const std::string& name, Factory<PoseDetector> f) {
    pose_detectors_[name] = std::move(f);
}
void BackendRegistry::register_contour_detector(const std::string& name, Factory<ContourDetector> f) {
    contour_detectors_[name] = std::move(f);
}
void BackendRegistry::register_captioner(const std::string& name, Factory<Captioner> f) {
    captioners_[name] = std::move(f);
}
void BackendRegistry::register_inpainter(const std::string& name, Factory<Inpainter> f) {
    inpainters_[name] = std::move(f);
}
void BackendRegistry::register_reenactor(const std::string& name, Factory<Reenactor> f) {
    reenactors_[name] = std::move(f);
}
void BackendRegistry::register_face_cropper(const std::string& name, Factory<FaceCropper> f) {
    face_croppers_[name] = std::move(f);
}
void BackendRegistry::register_identity_embedder(const std::string& name, Factory<Embedder> f) {
    identity_embedders_[name] = std::move(f);
}
void BackendRegistry::register_expression_embedder(const std::string& name, Factory<Embedder> f) {
    expression_embedders_[name] = std::move(f);
}

std::unique_ptr<PoseDetector> BackendRegistry::make_pose_detector(const std::string& name) const {
    return resolve(pose_detectors_, name, "pose-detector");
}
std::unique_ptr<ContourDetector> BackendRegistry::make_contour_detector(const std::string& name) const {
    return resolve(contour_detectors_, name, "contour-detector");
}
std::unique_ptr<Captioner> BackendRegistry::make_captioner(const std::string& name) const {
    return resolve(captioners_, name, "captioner");
}
std::unique_ptr<Inpainter> BackendRegistry::make_inpainter(const std::string& name) const {
    return resolve(inpainters_, name, "inpainter");
}
std::unique_ptr<Reenactor> BackendRegistry::make_reenactor(const std::string& name) const {
    return resolve(reenactors_, name, "reenactor");
}
std::unique_ptr<FaceCropper> BackendRegistry::make_face_cropper(const std::string& name) const {
    return resolve(face_croppers_, name, "face-cropper");
}
std::unique_ptr<Embedder> BackendRegistry::make_identity_embedder(const std::string& name) const {
    return resolve(identity_embedders_, name, "identity-embedder");
}
std::unique_ptr<Embedder> BackendRegistry::make_expression_embedder(const std::string& name) const {
    return resolve(expression_embedders_, name, "expression-embedder");
}

BackendRegistry& default_registry() {
    static BackendRegistry registry = [] {
        BackendRegistry r;
        synth::register_synthetic_backends(r);
        return r;
    }();
    return registry;
}

}  // namespace dtwin
