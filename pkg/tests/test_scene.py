"""Mesh soup, OBJ/MTL loading, tessellation, and turntable animation."""

import numpy as np
import pytest

import helpers
from lfdrender import assets, scene as scene_mod
from lfdrender.scene import (Turntable, mesh_at_frame, mesh_from_soup,
                             rotation_matrix, tessellate)


def unit_right_triangle():
    return np.array([[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]])


# ----------------------------------------------------------------- mesh soup

def test_mesh_from_soup_synthesizes_attributes():
    mesh = mesh_from_soup(unit_right_triangle())
    assert mesh.n_tris == 1
    assert mesh.world_areas() == pytest.approx([0.5])
    assert np.allclose(mesh.face_normals(), [[0.0, 0.0, 1.0]])
    assert np.allclose(mesh.tri_norm, 0.0 + mesh.face_normals()[:, None, :])
    assert not mesh.has_uv[0]
    assert len(mesh.materials) == 1


def test_mesh_areas_and_bbox():
    pos, uv = helpers.quad_soup(2.0, 1.0, z=0.25, uv_max=2.0)
    mesh = mesh_from_soup(pos, uv)
    assert mesh.world_areas() == pytest.approx([4.0, 4.0])
    assert mesh.uv_areas() == pytest.approx([2.0, 2.0])
    lo, hi = mesh.bbox()
    assert np.allclose(lo, [-2.0, -1.0, 0.25])
    assert np.allclose(hi, [2.0, 1.0, 0.25])


def test_tangent_frames_follow_uv_axes():
    mesh = helpers.quad_mesh(1.0, 1.0)
    tan, bit = mesh.tangent_frames()
    n = mesh.face_normals()
    for t in range(mesh.n_tris):
        assert np.linalg.norm(tan[t]) == pytest.approx(1.0)
        assert np.linalg.norm(bit[t]) == pytest.approx(1.0)
        assert abs(np.dot(tan[t], n[t])) < 1e-9
        # axis-aligned uvs on an xy quad: tangent +x, bitangent +y
        assert np.allclose(tan[t], [1.0, 0.0, 0.0], atol=1e-9)
        assert np.allclose(bit[t], [0.0, 1.0, 0.0], atol=1e-9)


def test_tangent_frames_survive_missing_uvs():
    mesh = mesh_from_soup(unit_right_triangle())  # zero uvs
    tan, bit = mesh.tangent_frames()
    assert np.all(np.isfinite(tan)) and np.all(np.isfinite(bit))
    assert np.linalg.norm(tan[0]) == pytest.approx(1.0)


# ------------------------------------------------------------ obj/mtl round

def test_scene_write_load_roundtrip(tmp_path):
    manifest = assets.write_scene("quad", tmp_path)
    mesh0, _ = assets.build_scene("quad")
    mesh1, anim1 = assets.load_scene_any(str(manifest))
    assert mesh1.n_tris == mesh0.n_tris
    assert np.allclose(mesh1.tri_pos, mesh0.tri_pos, atol=1e-6)
    assert np.allclose(mesh1.tri_uv, mesh0.tri_uv, atol=1e-6)
    assert len(mesh1.materials) == len(mesh0.materials)
    mat0, mat1 = mesh0.materials[0], mesh1.materials[0]
    assert np.allclose(mat1.scalars[0:3], mat0.scalars[0:3], atol=1e-5)
    # albedo texture survives the PNG trip within quantization error
    tex0 = mat0.textures["albedo"]
    tex1 = mat1.textures["albedo"]
    assert tex1.shape[:2] == tex0.shape[:2]
    assert np.max(np.abs(tex1[..., :3] - tex0[..., :3])) <= 1.0 / 255.0
    assert anim1.rate != 0.0


def test_load_scene_any_bundled_names():
    for name in assets.SCENE_NAMES:
        mesh, anim = assets.load_scene_any(name)
        assert mesh.n_tris > 0
        assert isinstance(anim, Turntable)
        assert np.all(np.isfinite(mesh.tri_pos))


def test_load_obj_drops_zero_area_faces(tmp_path):
    path = tmp_path / "degen.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 2 2\n"
                    "f 1 2 3\nf 4 4 4\n")
    with pytest.warns(UserWarning, match="zero-area"):
        mesh = scene_mod.load_obj(str(path))
    assert mesh.n_tris == 1
    assert mesh.world_areas() == pytest.approx([0.5])


def test_load_obj_negative_indices_and_quads(tmp_path):
    path = tmp_path / "quadface.obj"
    path.write_text("v -1 -1 0\nv 1 -1 0\nv 1 1 0\nv -1 1 0\n"
                    "f -4 -3 -2 -1\n")
    mesh = scene_mod.load_obj(str(path))
    assert mesh.n_tris == 2  # fan triangulation
    assert mesh.world_areas().sum() == pytest.approx(4.0)


# ---------------------------------------------------------------- tessellate

def test_tessellate_preserves_area_and_bounds_triangles():
    mesh = helpers.quad_mesh(1.0, 1.0)
    cams = helpers.simple_cams(n=3, width=256, height=256)
    out = tessellate(mesh, cams, max_pixels=100.0)
    assert out.n_tris > mesh.n_tris
    total0 = mesh.world_areas().sum()
    total1 = out.world_areas().sum()
    assert total1 == pytest.approx(total0, rel=1e-5)
    # every output triangle projects to <= 100 px^2 in every view
    for cam in cams:
        sx, sy, _ = cam.project(out.tri_pos.reshape(-1, 3))
        sx = sx.reshape(-1, 3)
        sy = sy.reshape(-1, 3)
        area = 0.5 * np.abs((sx[:, 1] - sx[:, 0]) * (sy[:, 2] - sy[:, 0])
                            - (sy[:, 1] - sy[:, 0]) * (sx[:, 2] - sx[:, 0]))
        assert float(area.max()) <= 100.0 + 1e-6


def test_tessellate_unbounded_is_identity():
    mesh = helpers.quad_mesh(1.0, 1.0)
    cams = helpers.simple_cams(n=2)
    out = tessellate(mesh, cams, max_pixels=np.inf)
    assert out.n_tris == mesh.n_tris
    assert np.allclose(np.sort(out.tri_pos.reshape(-1, 3), axis=0),
                       np.sort(mesh.tri_pos.reshape(-1, 3), axis=0))


def test_tessellate_keeps_materials_and_uv_area():
    mesh, _ = assets.build_scene("quad")
    cams = helpers.simple_cams(n=2, width=512, height=512)
    out = tessellate(mesh, cams, max_pixels=64.0)
    assert set(np.unique(out.tri_mat)) == set(np.unique(mesh.tri_mat))
    assert out.uv_areas().sum() == pytest.approx(mesh.uv_areas().sum(),
                                                 rel=1e-5)


# ----------------------------------------------------------------- animation

def test_rotation_matrix_orthonormal():
    rot = rotation_matrix((1.0, 2.0, -0.5), 0.73)
    assert np.allclose(rot @ rot.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(rot) == pytest.approx(1.0)
    axis = np.asarray((1.0, 2.0, -0.5))
    axis /= np.linalg.norm(axis)
    assert np.allclose(rot @ axis, axis, atol=1e-12)


def test_turntable_rigid_motion():
    mesh, _ = assets.build_scene("rotor")
    anim = Turntable(axis=(0.0, 1.0, 0.0), rate=0.1, pivot=(0.1, -0.2, 0.3))
    posed = mesh_at_frame(mesh, anim, 5)
    a = mesh.tri_pos.reshape(-1, 3)
    b = posed.tri_pos.reshape(-1, 3)
    da = np.linalg.norm(a[1:] - a[:-1], axis=1)
    db = np.linalg.norm(b[1:] - b[:-1], axis=1)
    assert np.allclose(da, db, rtol=1e-6, atol=1e-6)
    # normals stay unit
    assert np.allclose(np.linalg.norm(posed.tri_norm, axis=2), 1.0, atol=1e-9)


def test_turntable_full_revolution_returns():
    mesh = helpers.quad_mesh(1.0, 1.0)
    anim = Turntable(axis=(0.0, 1.0, 0.0), rate=2.0 * np.pi / 1000.0,
                     pivot=(0.0, 0.0, 0.0))
    posed = mesh_at_frame(mesh, anim, 1000)
    assert np.allclose(posed.tri_pos, mesh.tri_pos, atol=1e-4)


def test_frame_zero_is_base_pose():
    mesh = helpers.quad_mesh(1.0, 1.0)
    anim = Turntable(axis=(0.0, 1.0, 0.0), rate=0.05)
    assert mesh_at_frame(mesh, anim, 0) is mesh
    assert mesh_at_frame(mesh, None, 3) is mesh
