use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use reconf_ffi::*;

const ONE_BAD_VARIANT: &str = "features A, B; configs all; program \
    x := 1; #if (A) x := x + 1 #endif; #if (B) x := x - 1 #endif; ret := 2 / x";

fn parse(text: &str) -> (ReconfStatus, *mut ReconfFamily) {
    let text = CString::new(text).unwrap();
    let mut h = ptr::null_mut();
    let status = unsafe { reconf_family_parse(text.as_ptr(), &mut h) };
    (status, h)
}

fn take(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { reconf_string_free(s) };
    out
}

fn last_error() -> Option<String> {
    let p = reconf_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn reconfigure_project_and_check() {
    let (status, h) = parse(ONE_BAD_VARIANT);
    assert_eq!(status, ReconfStatus::Ok);
    assert!(last_error().is_none());

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { reconf_family_reconfigure(h, true, &mut out) }, ReconfStatus::Ok);
    let program = take(out);
    assert!(program.starts_with("var A := 0 or 1 in"), "{program}");

    let config = CString::new("!A,B").unwrap();
    assert_eq!(unsafe { reconf_family_project(h, config.as_ptr(), &mut out) }, ReconfStatus::Ok);
    assert_eq!(take(out), "x := 1;\nskip;\nx := x - 1;\nret := 2 / x");

    assert_eq!(unsafe { reconf_family_outcomes(h, 1000, &mut out) }, ReconfStatus::Ok);
    let json: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 3);

    let mut verdict = ReconfVerdict::Fail;
    assert_eq!(unsafe { reconf_family_check_equiv(h, true, 1000, &mut verdict) }, ReconfStatus::Ok);
    assert_eq!(verdict, ReconfVerdict::Pass);
    assert_eq!(unsafe { reconf_family_check_equiv(h, true, 1, &mut verdict) }, ReconfStatus::Ok);
    assert_eq!(verdict, ReconfVerdict::Inconclusive);

    unsafe { reconf_family_free(h) };
}

#[test]
fn failures_set_the_error_message() {
    let (status, h) = parse("features A; configs all; program x := ");
    assert_eq!(status, ReconfStatus::Syntax);
    assert!(h.is_null());
    assert!(last_error().unwrap().starts_with("syntax error"));

    let (status, h) = parse("features A; configs all; program x := 0 or 1");
    assert_ne!(status, ReconfStatus::Ok);
    assert!(h.is_null());

    let mut h = ptr::null_mut();
    assert_eq!(unsafe { reconf_family_parse(ptr::null(), &mut h) }, ReconfStatus::NullArgument);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { reconf_family_reconfigure(ptr::null(), true, &mut out) }, ReconfStatus::NullArgument);

    let (_, h) = parse("features A; configs A; program skip");
    let config = CString::new("!A").unwrap();
    assert_eq!(unsafe { reconf_family_project(h, config.as_ptr(), &mut out) }, ReconfStatus::Malformed);
    assert!(last_error().unwrap().contains("not valid"));
    unsafe { reconf_family_free(h) };

    let bytes = [0xffu8, 0];
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { reconf_family_parse(bytes.as_ptr().cast(), &mut h) }, ReconfStatus::InvalidUtf8);

    unsafe {
        reconf_family_free(ptr::null_mut());
        reconf_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_function() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/reconf.h")).unwrap();
    for name in [
        "reconf_family_parse",
        "reconf_family_free",
        "reconf_family_reconfigure",
        "reconf_family_project",
        "reconf_family_outcomes",
        "reconf_family_check_equiv",
        "reconf_string_free",
        "reconf_last_error_message",
        "RECONF_STATUS_OK",
        "RECONF_VERDICT_PASS",
    ] {
        assert!(header.contains(name), "{name} missing from the header");
    }
}

#[test]
fn header_compiles_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let source = "#include \"reconf.h\"\nint main(void) { return reconf_last_error_message() != 0; }\n";
    let dir = std::env::temp_dir().join(format!("reconf-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("main.c");
    std::fs::write(&file, source).unwrap();
    let result = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(&include)
        .arg(&file)
        .status();
    std::fs::remove_dir_all(&dir).unwrap();
    match result {
        Ok(status) => assert!(status.success()),
        Err(_) => eprintln!("no C compiler; skipped"),
    }
}
