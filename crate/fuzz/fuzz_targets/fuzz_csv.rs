#![no_main]

use kitaev_cooling::csv_io::{read_records, write_records};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = read_records(data) {
        let mut buf = Vec::new();
        write_records(&records, &mut buf).expect("write to memory");
        assert_eq!(read_records(buf.as_slice()).expect("written csv parses"), records);
    }
});
