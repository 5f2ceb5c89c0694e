#![no_main]

use std::collections::BTreeMap;

use libfuzzer_sys::fuzz_target;

// First line is the model name, then one `key=value` per line.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let mut lines = text.lines();
    let name = lines.next().unwrap_or("");
    let mut params = BTreeMap::new();
    for line in lines {
        let Some((k, v)) = line.split_once('=') else {
            return;
        };
        let Ok(v) = v.trim().parse::<f64>() else {
            return;
        };
        params.insert(k.trim().to_string(), v);
    }
    if let Ok(m) = pdmp::models::build(name, &params) {
        let x = m.default_x0();
        let _ = m.triple.flow().killing_time(&x);
    }
});
