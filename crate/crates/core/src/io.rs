//! File formats.
//!
//! | Data | Format |
//! |------|--------|
//! | mesh | Wavefront OBJ subset (`v`, `f`), polygons fan-triangulated |
//! | depth / confidence raster | `RDM1`: magic, LE u32 width, LE u32 height, LE f32 row-major |
//! | mask | binary PGM (`P5`, maxval 255), nonzero = foreground |
//! | color | binary PPM (`P6`, maxval 255) |
//! | point cloud | ASCII PLY, `x y z [confidence]` |
//! | camera | `fx fy cx cy width height` then three rows of the world-to-camera `[R|t]` |
//! | scene | `mesh PATH` + 12 pose numbers per line, optional `camera` line |
//! | input view | directory with `depth.rdm`, `mask.pgm`, `camera.cam`, optional `rgb.ppm` |
//!
//! Loaders return [`Error::Parse`] (text, 1-based line) or [`Error::Format`]
//! (binary, byte offset) on malformed input and never panic.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, CameraIntrinsics, Mat3, Raster, RigidTransform, Vec3};
use crate::mesh::{Scene, TriangleMesh};
use crate::metrics::PointCloud;
use crate::predictor::InputView;

/// Rotations farther than this from orthonormal are rejected on load.
pub const LOAD_ROTATION_TOLERANCE: f64 = 1e-6;

pub type RgbImage = Raster<[u8; 3]>;

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = read(path)?;
    String::from_utf8(bytes).map_err(|e| Error::Format {
        path: path.into(),
        offset: e.utf8_error().valid_up_to() as u64,
        message: "file is not valid UTF-8".into(),
    })
}

/// Writes `bytes`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.into(),
        line,
        message: message.into(),
    }
}

fn format_err(path: &Path, offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.into(),
        offset: offset as u64,
        message: message.into(),
    }
}

fn parse_f64(tok: &str, path: &Path, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(path, line, format!("expected a number, found `{tok}`")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value `{tok}`")));
    }
    Ok(v)
}

// ---------------------------------------------------------------- OBJ

pub fn parse_obj(text: &str, path: &Path) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let coords: Vec<&str> = toks.collect();
                if coords.len() < 3 {
                    return Err(parse_err(path, line_no, "vertex needs three coordinates"));
                }
                vertices.push(Vec3::new(
                    parse_f64(coords[0], path, line_no)?,
                    parse_f64(coords[1], path, line_no)?,
                    parse_f64(coords[2], path, line_no)?,
                ));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in toks {
                    let head = tok.split('/').next().unwrap_or("");
                    let i: i64 = head
                        .parse()
                        .map_err(|_| parse_err(path, line_no, format!("bad face index `{tok}`")))?;
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        vertices.len() as i64 + i
                    } else {
                        return Err(parse_err(path, line_no, "face index 0 is invalid"));
                    };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(parse_err(
                            path,
                            line_no,
                            format!("face index {i} out of range"),
                        ));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(parse_err(
                        path,
                        line_no,
                        "face needs at least three vertices",
                    ));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(TriangleMesh {
        vertices,
        triangles,
    })
}

pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    parse_obj(&read_text(path)?, path)
}

pub fn format_obj(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

pub fn save_mesh(path: &Path, mesh: &TriangleMesh) -> Result<()> {
    write_file(path, format_obj(mesh).as_bytes())
}

// ---------------------------------------------------------------- RDM1

const RDM_MAGIC: &[u8; 4] = b"RDM1";

/// Values are stored as f32.
pub fn encode_raster(r: &Raster<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * r.len());
    out.extend_from_slice(RDM_MAGIC);
    out.extend_from_slice(&(r.width() as u32).to_le_bytes());
    out.extend_from_slice(&(r.height() as u32).to_le_bytes());
    for &v in r.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_raster(bytes: &[u8], path: &Path) -> Result<Raster<f64>> {
    if bytes.len() < 4 {
        return Err(format_err(path, bytes.len(), "unexpected EOF in magic"));
    }
    if &bytes[..4] != RDM_MAGIC {
        return Err(format_err(path, 0, "bad magic, expected RDM1"));
    }
    if bytes.len() < 12 {
        return Err(format_err(path, bytes.len(), "unexpected EOF in header"));
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let height = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| format_err(path, 4, "raster dimensions overflow"))?;
    let body = &bytes[12..];
    if body.len() < expected {
        return Err(format_err(
            path,
            bytes.len(),
            "unexpected EOF in raster data",
        ));
    }
    if body.len() > expected {
        return Err(format_err(
            path,
            12 + expected,
            "trailing bytes after raster data",
        ));
    }
    let mut data = Vec::with_capacity(width * height);
    for (k, chunk) in body.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
        if !v.is_finite() {
            return Err(format_err(path, 12 + 4 * k, "non-finite raster value"));
        }
        data.push(v as f64);
    }
    Raster::from_vec(width, height, data)
}

pub fn load_raster(path: &Path) -> Result<Raster<f64>> {
    decode_raster(&read(path)?, path)
}

pub fn save_raster(path: &Path, r: &Raster<f64>) -> Result<()> {
    write_file(path, &encode_raster(r))
}

// ---------------------------------------------------------------- PGM / PPM

/// Parses a binary netpbm header; returns (width, height, data offset).
fn parse_pnm_header(bytes: &[u8], magic: &[u8; 2], path: &Path) -> Result<(usize, usize, usize)> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(format_err(
            path,
            0,
            format!("bad magic, expected {}", String::from_utf8_lossy(magic)),
        ));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(format_err(path, pos, "unexpected EOF in header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(format_err(path, pos, "expected a decimal header field"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_err(path, start, "header field out of range"))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        Some(_) => return Err(format_err(path, pos, "expected whitespace after maxval")),
        None => return Err(format_err(path, pos, "unexpected EOF in header")),
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(format_err(
            path,
            pos,
            format!("maxval must be 255, found {maxval}"),
        ));
    }
    Ok((width, height, pos))
}

fn pnm_body<'a>(
    bytes: &'a [u8],
    offset: usize,
    len: Option<usize>,
    path: &Path,
) -> Result<&'a [u8]> {
    let len = len.ok_or_else(|| format_err(path, offset, "image dimensions overflow"))?;
    let body = &bytes[offset..];
    if body.len() < len {
        return Err(format_err(
            path,
            bytes.len(),
            "unexpected EOF in pixel data",
        ));
    }
    if body.len() > len {
        return Err(format_err(
            path,
            offset + len,
            "trailing bytes after pixel data",
        ));
    }
    Ok(body)
}

pub fn decode_mask(bytes: &[u8], path: &Path) -> Result<BinaryMask> {
    let (w, h, off) = parse_pnm_header(bytes, b"P5", path)?;
    let body = pnm_body(bytes, off, w.checked_mul(h), path)?;
    Raster::from_vec(w, h, body.iter().map(|&b| b != 0).collect())
}

pub fn encode_mask(m: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", m.width(), m.height()).into_bytes();
    out.extend(m.data().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    decode_mask(&read(path)?, path)
}

pub fn save_mask(path: &Path, m: &BinaryMask) -> Result<()> {
    write_file(path, &encode_mask(m))
}

pub fn decode_rgb(bytes: &[u8], path: &Path) -> Result<RgbImage> {
    let (w, h, off) = parse_pnm_header(bytes, b"P6", path)?;
    let body = pnm_body(
        bytes,
        off,
        w.checked_mul(h).and_then(|n| n.checked_mul(3)),
        path,
    )?;
    Raster::from_vec(
        w,
        h,
        body.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
    )
}

pub fn encode_rgb(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    for px in img.data() {
        out.extend_from_slice(px);
    }
    out
}

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    decode_rgb(&read(path)?, path)
}

pub fn save_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    write_file(path, &encode_rgb(img))
}

// ---------------------------------------------------------------- PLY

/// Nine significant digits.
fn fmt9(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn format_ply(cloud: &PointCloud) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "ply\nformat ascii 1.0\nelement vertex {}", cloud.len());
    s.push_str("property float x\nproperty float y\nproperty float z\n");
    if cloud.confidence.is_some() {
        s.push_str("property float confidence\n");
    }
    s.push_str("end_header\n");
    for (k, p) in cloud.points.iter().enumerate() {
        let _ = write!(s, "{} {} {}", fmt9(p.x), fmt9(p.y), fmt9(p.z));
        if let Some(c) = &cloud.confidence {
            let _ = write!(s, " {}", fmt9(c[k]));
        }
        s.push('\n');
    }
    s
}

pub fn parse_ply(text: &str, path: &Path) -> Result<PointCloud> {
    struct Element {
        name: String,
        count: usize,
        props: Vec<String>,
    }
    let mut lines = text.lines().enumerate();
    let first = lines.next().map(|(_, l)| l.trim());
    if first != Some("ply") {
        return Err(parse_err(path, 1, "missing `ply` magic line"));
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut header_done = false;
    for (n, raw) in lines.by_ref() {
        let line_no = n + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.first().copied() {
            Some("format") => {
                if toks.get(1) != Some(&"ascii") {
                    return Err(parse_err(path, line_no, "only ascii PLY is supported"));
                }
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                if toks.len() != 3 {
                    return Err(parse_err(path, line_no, "malformed element line"));
                }
                let count = toks[2].parse().map_err(|_| {
                    parse_err(path, line_no, format!("bad element count `{}`", toks[2]))
                })?;
                elements.push(Element {
                    name: toks[1].to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(path, line_no, "property before any element"))?;
                let name = toks
                    .last()
                    .filter(|_| toks.len() >= 3)
                    .ok_or_else(|| parse_err(path, line_no, "malformed property line"))?;
                if toks[1] == "list" {
                    if el.name == "vertex" {
                        return Err(parse_err(
                            path,
                            line_no,
                            "list properties on vertices are unsupported",
                        ));
                    }
                }
                el.props.push(name.to_string());
            }
            Some("end_header") => {
                header_done = true;
                break;
            }
            Some(other) => {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("unknown header keyword `{other}`"),
                ))
            }
        }
    }
    if !header_done {
        return Err(parse_err(
            path,
            text.lines().count(),
            "unexpected EOF in header",
        ));
    }
    let mut points = Vec::new();
    let mut confidence: Option<Vec<f64>> = None;
    for el in &elements {
        let is_vertex = el.name == "vertex";
        let find = |n: &str| el.props.iter().position(|p| p == n);
        let (ix, iy, iz, ic) = (find("x"), find("y"), find("z"), find("confidence"));
        if is_vertex && (ix.is_none() || iy.is_none() || iz.is_none()) {
            return Err(parse_err(path, 0, "vertex element lacks x, y or z"));
        }
        if is_vertex && ic.is_some() {
            confidence = Some(Vec::with_capacity(el.count.min(1 << 24)));
        }
        if is_vertex {
            points.reserve(el.count.min(1 << 24));
        }
        for _ in 0..el.count {
            let (n, raw) = lines.next().ok_or_else(|| {
                parse_err(
                    path,
                    text.lines().count(),
                    format!("unexpected EOF in element `{}`", el.name),
                )
            })?;
            if !is_vertex {
                continue;
            }
            let line_no = n + 1;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            if toks.len() < el.props.len() {
                return Err(parse_err(path, line_no, "too few values on vertex line"));
            }
            let get = |i: Option<usize>| parse_f64(toks[i.expect("checked")], path, line_no);
            points.push(Vec3::new(get(ix)?, get(iy)?, get(iz)?));
            if let Some(c) = confidence.as_mut() {
                c.push(get(ic)?);
            }
        }
    }
    Ok(PointCloud { points, confidence })
}

pub fn load_cloud(path: &Path) -> Result<PointCloud> {
    parse_ply(&read_text(path)?, path)
}

pub fn save_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    write_file(path, format_ply(cloud).as_bytes())
}

// ---------------------------------------------------------------- cameras

fn format_pose(pose: &RigidTransform) -> String {
    pose.to_rows()
        .iter()
        .map(|r| format!("{} {} {} {}", r[0], r[1], r[2], r[3]))
        .collect::<Vec<_>>()
        .join("\n")
}

fn pose_from_numbers(v: &[f64], path: &Path, line: usize) -> Result<RigidTransform> {
    let rot = Mat3::new(v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10]);
    let t = Vec3::new(v[3], v[7], v[11]);
    RigidTransform::new_orthonormalized(rot, t, LOAD_ROTATION_TOLERANCE)
        .map_err(|e| parse_err(path, line, e.to_string()))
}

fn intrinsics_from_numbers(v: &[f64], path: &Path, line: usize) -> Result<CameraIntrinsics> {
    let dim = |x: f64| -> Result<usize> {
        if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
            Ok(x as usize)
        } else {
            Err(parse_err(
                path,
                line,
                format!("image size must be a positive integer, found {x}"),
            ))
        }
    };
    CameraIntrinsics::new(v[0], v[1], v[2], v[3], dim(v[4])?, dim(v[5])?)
        .map_err(|e| parse_err(path, line, e.to_string()))
}

pub fn format_camera(k: &CameraIntrinsics, pose: &RigidTransform) -> String {
    format!(
        "{} {} {} {} {} {}\n{}\n",
        k.fx,
        k.fy,
        k.cx,
        k.cy,
        k.width,
        k.height,
        format_pose(pose)
    )
}

pub fn parse_camera(text: &str, path: &Path) -> Result<(CameraIntrinsics, RigidTransform)> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let numbers = |idx: usize, count: usize| -> Result<Vec<f64>> {
        let line = lines
            .get(idx)
            .ok_or_else(|| parse_err(path, idx + 1, format!("missing line {}", idx + 1)))?;
        let v = line
            .split_whitespace()
            .map(|t| parse_f64(t, path, idx + 1))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != count {
            return Err(parse_err(
                path,
                idx + 1,
                format!("expected {count} numbers, found {}", v.len()),
            ));
        }
        Ok(v)
    };
    let k = intrinsics_from_numbers(&numbers(0, 6)?, path, 1)?;
    let mut pose = Vec::with_capacity(12);
    for row in 1..4 {
        pose.extend(numbers(row, 4)?);
    }
    if lines.len() > 4 {
        return Err(parse_err(path, 5, "unexpected content after the pose rows"));
    }
    Ok((k, pose_from_numbers(&pose, path, 2)?))
}

pub fn load_camera(path: &Path) -> Result<(CameraIntrinsics, RigidTransform)> {
    parse_camera(&read_text(path)?, path)
}

pub fn save_camera(path: &Path, k: &CameraIntrinsics, pose: &RigidTransform) -> Result<()> {
    write_file(path, format_camera(k, pose).as_bytes())
}

// ---------------------------------------------------------------- scenes

/// A scene file with its optional input camera.
#[derive(Debug, Clone)]
pub struct SceneFile {
    pub scene: Scene,
    pub camera: Option<(CameraIntrinsics, RigidTransform)>,
}

/// Mesh paths resolve relative to the scene file's directory.
pub fn load_scene(path: &Path) -> Result<SceneFile> {
    let text = read_text(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut scene = Scene::new();
    let mut camera = None;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.first().copied() {
            None => {}
            Some("mesh") => {
                if toks.len() != 14 {
                    return Err(parse_err(
                        path,
                        line_no,
                        "expected `mesh PATH` and 12 pose numbers",
                    ));
                }
                let nums = toks[2..]
                    .iter()
                    .map(|t| parse_f64(t, path, line_no))
                    .collect::<Result<Vec<_>>>()?;
                let placement = pose_from_numbers(&nums, path, line_no)?;
                let mesh_path: PathBuf = base.join(toks[1]);
                let mesh = load_mesh(&mesh_path)?;
                scene.push(mesh, placement);
            }
            Some("camera") => {
                if toks.len() != 19 {
                    return Err(parse_err(
                        path,
                        line_no,
                        "expected `camera` with 6 intrinsics and 12 pose numbers",
                    ));
                }
                let nums = toks[1..]
                    .iter()
                    .map(|t| parse_f64(t, path, line_no))
                    .collect::<Result<Vec<_>>>()?;
                let k = intrinsics_from_numbers(&nums[..6], path, line_no)?;
                camera = Some((k, pose_from_numbers(&nums[6..], path, line_no)?));
            }
            Some(other) => {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("unknown keyword `{other}`"),
                ))
            }
        }
    }
    Ok(SceneFile { scene, camera })
}

/// Writes `object_NNN.obj` files plus `scene.txt` into `dir`; returns the
/// scene file path.
pub fn save_scene_dir(
    dir: &Path,
    scene: &Scene,
    camera: Option<&(CameraIntrinsics, RigidTransform)>,
) -> Result<PathBuf> {
    let mut text = String::from("# mesh PATH r00 r01 r02 t0 r10 r11 r12 t1 r20 r21 r22 t2\n");
    for (k, obj) in scene.objects.iter().enumerate() {
        let name = format!("object_{k:03}.obj");
        save_mesh(&dir.join(&name), &obj.mesh)?;
        let rows = obj.placement.to_rows();
        let nums: Vec<String> = rows.iter().flatten().map(|v| v.to_string()).collect();
        let _ = writeln!(text, "mesh {name} {}", nums.join(" "));
    }
    if let Some((k, pose)) = camera {
        let nums: Vec<String> = pose
            .to_rows()
            .iter()
            .flatten()
            .map(|v| v.to_string())
            .collect();
        let _ = writeln!(
            text,
            "camera {} {} {} {} {} {} {}",
            k.fx,
            k.fy,
            k.cx,
            k.cy,
            k.width,
            k.height,
            nums.join(" ")
        );
    }
    let path = dir.join("scene.txt");
    write_file(&path, text.as_bytes())?;
    Ok(path)
}

// ---------------------------------------------------------------- input views

pub const INPUT_DEPTH: &str = "depth.rdm";
pub const INPUT_MASK: &str = "mask.pgm";
pub const INPUT_CAMERA: &str = "camera.cam";
pub const INPUT_RGB: &str = "rgb.ppm";

/// Reads `depth.rdm`, `mask.pgm`, `camera.cam` and, if present, `rgb.ppm`.
pub fn load_input_view(dir: &Path) -> Result<InputView> {
    let depth = load_raster(&dir.join(INPUT_DEPTH))?;
    let mask = load_mask(&dir.join(INPUT_MASK))?;
    let (k, pose) = load_camera(&dir.join(INPUT_CAMERA))?;
    let rgb_path = dir.join(INPUT_RGB);
    let rgb = if rgb_path.exists() {
        Some(load_rgb(&rgb_path)?)
    } else {
        None
    };
    InputView::new(rgb, depth, mask, k, pose)
}

pub fn save_input_view(dir: &Path, view: &InputView, with_rgb: bool) -> Result<()> {
    save_raster(&dir.join(INPUT_DEPTH), &view.depth)?;
    save_mask(&dir.join(INPUT_MASK), &view.mask)?;
    save_camera(&dir.join(INPUT_CAMERA), &view.intrinsics, &view.pose)?;
    if with_rgb {
        save_rgb(&dir.join(INPUT_RGB), &view.rgb)?;
    }
    Ok(())
}

/// A scene file, or a single OBJ mesh placed at the origin.
pub fn load_scene_or_mesh(path: &Path) -> Result<SceneFile> {
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("obj"))
    {
        let scene = Scene::new().with_object(load_mesh(path)?, RigidTransform::identity());
        Ok(SceneFile {
            scene,
            camera: None,
        })
    } else {
        load_scene(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::euler_zyx;

    fn p() -> &'static Path {
        Path::new("<mem>")
    }

    #[test]
    fn obj_with_slashes_and_polygons() {
        let text = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1/1/1 2/2/1 3//1 4\n";
        let mesh = parse_obj(text, p()).unwrap();
        assert_eq!(mesh.triangles, vec![[0, 1, 2], [0, 2, 3]]);
        let back = parse_obj(&format_obj(&mesh), p()).unwrap();
        assert_eq!(back, mesh);
    }

    #[test]
    fn obj_errors_carry_line_numbers() {
        let err = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 x\n", p()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let err = parse_obj("v 0 0 0\nf 1 2 3\n", p()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn raster_round_trip_and_errors() {
        let r = Raster::from_vec(3, 2, vec![0.0, 1.5, 2.25, -0.0, 1e-3f32 as f64, 7.0]).unwrap();
        let bytes = encode_raster(&r);
        assert_eq!(&bytes[..4], b"RDM1");
        assert_eq!(bytes.len(), 12 + 24);
        let back = decode_raster(&bytes, p()).unwrap();
        assert_eq!(encode_raster(&back), bytes);
        let err = decode_raster(&bytes[..20], p()).unwrap_err();
        assert!(err.to_string().contains("unexpected EOF"), "{err}");
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_raster(&bad, p()).is_err());
    }

    #[test]
    fn pgm_comments_and_maxval() {
        let bytes = b"P5\n# made by hand\n2 2\n# another\n255\n\x00\xff\x01\x00";
        let m = decode_mask(bytes, p()).unwrap();
        assert_eq!(m.data(), &[false, true, true, false]);
        assert_eq!(decode_mask(&encode_mask(&m), p()).unwrap(), m);
        assert!(decode_mask(b"P5\n2 2\n65535\n\0\0\0\0\0\0\0\0", p()).is_err());
        assert!(decode_mask(b"P5\n2 2\n255\n\0\0\0", p()).is_err());
    }

    #[test]
    fn ply_round_trip_and_unknown_properties() {
        let cloud = PointCloud::with_confidence(
            vec![Vec3::new(0.1, -2.5, 1e-4), Vec3::new(1.0 / 3.0, 2.0, 3.0)],
            vec![21.0, 5.5],
        );
        let text = format_ply(&cloud);
        let back = parse_ply(&text, p()).unwrap();
        for (a, b) in cloud.points.iter().zip(&back.points) {
            assert!((a - b).norm() <= 1e-8 * a.norm());
        }
        assert_eq!(format_ply(&back), text);
        let empty = parse_ply(&format_ply(&PointCloud::default()), p()).unwrap();
        assert!(empty.is_empty());
        let extra = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty uchar red\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n1 200 2 3\n3 0 0 0\n";
        let c = parse_ply(extra, p()).unwrap();
        assert_eq!(c.points, vec![Vec3::new(1.0, 2.0, 3.0)]);
        assert!(c.confidence.is_none());
    }

    #[test]
    fn camera_round_trip_and_validation() {
        let k = CameraIntrinsics::new(525.5, 520.25, 319.5, 239.5, 640, 480).unwrap();
        let pose =
            RigidTransform::new(euler_zyx(0.4, -0.3, 1.1), Vec3::new(0.1, 0.2, -0.7)).unwrap();
        let text = format_camera(&k, &pose);
        let (k2, pose2) = parse_camera(&text, p()).unwrap();
        assert_eq!(k2, k);
        assert_eq!(pose2, pose);
        let skewed = "500 500 320 240 640 480\n1 0.01 0 0\n0 1 0 0\n0 0 1 0\n";
        assert!(parse_camera(skewed, p()).is_err());
        let missing = "500 500 320 240 640 480\n1 0 0 0\n0 1 0 0\n";
        assert!(matches!(
            parse_camera(missing, p()),
            Err(Error::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn slightly_off_rotation_is_reorthonormalized() {
        let text = "500 500 320 240 640 480\n1 1e-8 0 0\n0 1 0 0\n0 0 1 0\n";
        let (_, pose) = parse_camera(text, p()).unwrap();
        let r = pose.rotation();
        assert!((r.transpose() * r - Mat3::identity()).abs().max() < 1e-12);
    }
}
