use maxbisect_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    unsafe { CStr::from_ptr(mb_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn constants_and_gamma() {
    let mut k = MbConstants { alpha_gw: MbInterval { lo: 0.0, hi: 0.0 }, b_gw: MbInterval { lo: 0.0, hi: 0.0 }, c_gw: MbInterval { lo: 0.0, hi: 0.0 } };
    assert_eq!(unsafe { mb_constants(&mut k) }, MbStatus::Ok);
    assert!(k.b_gw.lo <= -0.6891577 && -0.6891578 <= k.b_gw.hi);
    assert!(k.alpha_gw.lo <= 0.8785672 + 1e-7 && k.alpha_gw.hi >= 0.8785672 - 1e-7);

    let mut g = MbInterval { lo: 0.0, hi: 0.0 };
    assert_eq!(unsafe { mb_gamma(0.0, 0.5, 0.5, &mut g) }, MbStatus::Ok);
    assert!(g.lo <= 0.25 && 0.25 <= g.hi);
    assert_eq!(unsafe { mb_gamma(0.0, 1.5, 0.5, &mut g) }, MbStatus::OutOfRange);
    assert!(last_error().contains("q1"));
    assert_eq!(unsafe { mb_gamma(0.0, 0.5, 0.5, ptr::null_mut()) }, MbStatus::NullPointer);
}

#[test]
fn blueprint_lifecycle() {
    let mut bp = ptr::null_mut();
    assert_eq!(unsafe { mb_blueprint_dstar(&mut bp) }, MbStatus::Ok);
    let n = unsafe { mb_blueprint_len(bp) };
    assert_eq!(n, 5);
    let mut c = MbInterval { lo: 0.0, hi: 0.0 };
    assert_eq!(unsafe { mb_blueprint_completeness(bp, &mut c) }, MbStatus::Ok);
    assert!(c.lo <= 0.844578 + 1e-6 && c.hi >= 0.844578 - 1e-6 && c.hi - c.lo < 1e-10);

    let t = vec![0.0; n];
    let (mut s, mut bal) = (c, c);
    assert_eq!(unsafe { mb_blueprint_soundness(bp, t.as_ptr(), n, &mut s, &mut bal) }, MbStatus::Ok);
    assert!(s.lo <= 0.74198205738315182 && 0.74198205738315182 <= s.hi);
    assert!(bal.lo <= 0.0 && 0.0 <= bal.hi);
    assert_eq!(unsafe { mb_blueprint_soundness(bp, t.as_ptr(), n - 1, &mut s, ptr::null_mut()) }, MbStatus::OutOfRange);
    unsafe { mb_blueprint_free(bp) };
    unsafe { mb_blueprint_free(ptr::null_mut()) };
    assert_eq!(unsafe { mb_blueprint_len(ptr::null()) }, 0);
}

#[test]
fn blueprint_parse_errors() {
    let mut bp = ptr::null_mut();
    let bad = CString::new("this is not a blueprint").unwrap();
    let st = unsafe { mb_blueprint_parse(bad.as_ptr(), &mut bp) };
    assert_eq!(st, MbStatus::Parse);
    assert!(bp.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { mb_blueprint_parse(ptr::null(), &mut bp) }, MbStatus::NullPointer);
    let invalid = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { mb_blueprint_parse(invalid.as_ptr().cast(), &mut bp) }, MbStatus::InvalidUtf8);
    let good = CString::new(maxbisect::blueprint::DSTAR_TEXT).unwrap();
    assert_eq!(unsafe { mb_blueprint_parse(good.as_ptr(), &mut bp) }, MbStatus::Ok);
    assert_eq!(unsafe { mb_blueprint_len(bp) }, 5);
    unsafe { mb_blueprint_free(bp) };
}

#[test]
fn certify_replay_round_trip() {
    let mut bp = ptr::null_mut();
    unsafe { mb_blueprint_dstar(&mut bp) };
    // A control bound below the true maximum is refuted quickly.
    let mut cert = ptr::null_mut();
    assert_eq!(unsafe { mb_certify(bp, 0.8785, 30, &mut cert) }, MbStatus::NotVerified);
    assert_eq!(unsafe { mb_certificate_verified(cert) }, 0);
    unsafe { mb_certificate_free(cert) };

    // Parse the committed certificate and spot-replay it.
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/dstar-0.87853.cert")).unwrap();
    let ctext = CString::new(text.clone()).unwrap();
    let mut cert = ptr::null_mut();
    assert_eq!(unsafe { mb_certificate_parse(ctext.as_ptr(), &mut cert) }, MbStatus::Ok);
    assert_eq!(unsafe { mb_certificate_verified(cert) }, 1);
    assert_eq!(unsafe { mb_certificate_regions(cert) }, 15846);
    let mut r = 0.0;
    assert_eq!(unsafe { mb_certificate_max_ratio(cert, &mut r) }, MbStatus::Ok);
    assert!(r < 0.87853);
    assert_eq!(unsafe { mb_certificate_replay(cert, bp, 200) }, MbStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { mb_certificate_to_text(cert, &mut out) }, MbStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(out) }.to_str().unwrap(), text);
    unsafe { mb_string_free(out) };
    unsafe { mb_certificate_free(cert) };

    // A certificate for another blueprint does not replay.
    let tampered = CString::new(text.replacen("bound 0.87853", "bound 0.8785", 1)).unwrap();
    let mut cert = ptr::null_mut();
    if unsafe { mb_certificate_parse(tampered.as_ptr(), &mut cert) } == MbStatus::Ok {
        assert_eq!(unsafe { mb_certificate_replay(cert, bp, 200) }, MbStatus::NotVerified);
        assert!(!last_error().is_empty());
        unsafe { mb_certificate_free(cert) };
    }
    unsafe { mb_blueprint_free(bp) };
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/maxbisect.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let mut count = 0;
    for line in src.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
            count += 1;
        }
    }
    assert!(count >= 15);
    assert!(header.contains("typedef struct MbBlueprint MbBlueprint;"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("use.c");
    std::fs::write(
        &c,
        "#include \"maxbisect.h\"\nint main(void) { MbBlueprint *bp = 0; MbStatus s = mb_blueprint_dstar(&bp); mb_blueprint_free(bp); return s == MB_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let st = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&c)
        .status()
        .unwrap();
    assert!(st.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
