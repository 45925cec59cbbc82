//! JVM class-file reader that counts bytecode instructions (NBI).
//!
//! Only what NBI needs is decoded: the constant pool (to resolve names), the
//! method table, and each method's `Code` attribute. Instruction boundaries
//! follow the class-file format exactly, including the padded `tableswitch`
//! and `lookupswitch` forms and the `wide` prefix.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Highest major version accepted by default (Java 25).
pub const DEFAULT_MAX_MAJOR: u16 = 69;

const MAGIC: u32 = 0xCAFE_BABE;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSummary {
    pub name: String,
    pub descriptor: String,
    /// Opcodes decoded from the `Code` attribute; 0 for abstract and native methods.
    pub instruction_count: u64,
    /// `code_length` as declared by the attribute.
    pub code_length: u32,
    /// Bytes consumed while decoding; always equals `code_length`.
    pub decoded_length: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassFileSummary {
    /// Binary name with dots, e.g. `com.acme.Outer$Inner`.
    pub class_name: String,
    pub major_version: u16,
    pub methods: Vec<MethodSummary>,
}

impl ClassFileSummary {
    /// Name of the enclosing top-level class (`Outer$Inner` -> `Outer`).
    pub fn top_level_name(&self) -> &str {
        match self.class_name.find('$') {
            Some(i) if i > 0 => &self.class_name[..i],
            _ => &self.class_name,
        }
    }
}

/// Sum of instruction counts over every method, constructors and static
/// initializers included.
pub fn count_nbi(summary: &ClassFileSummary) -> u64 {
    summary.methods.iter().map(|m| m.instruction_count).sum()
}

#[derive(Debug, Clone, Copy)]
pub struct ReaderOptions {
    pub max_major: u16,
}

impl Default for ReaderOptions {
    fn default() -> Self {
        ReaderOptions {
            max_major: DEFAULT_MAX_MAJOR,
        }
    }
}

pub fn parse_classfile(bytes: &[u8]) -> Result<ClassFileSummary> {
    parse_classfile_with(bytes, ReaderOptions::default())
}

pub fn parse_classfile_with(bytes: &[u8], options: ReaderOptions) -> Result<ClassFileSummary> {
    let mut r = ByteReader::new(bytes);
    if r.u4()? != MAGIC {
        return Err(malformed("bad magic"));
    }
    let _minor = r.u2()?;
    let major = r.u2()?;
    if major > options.max_major {
        return Err(Error::UnsupportedMajorVersion {
            found: major,
            ceiling: options.max_major,
        });
    }
    let pool = ConstantPool::read(&mut r)?;
    let _access = r.u2()?;
    let this_class = r.u2()?;
    let class_name = pool.class_name(this_class)?.replace('/', ".");
    let _super = r.u2()?;
    let interfaces = r.u2()?;
    r.skip(interfaces as usize * 2)?;

    let fields = r.u2()?;
    for _ in 0..fields {
        r.skip(6)?;
        skip_attributes(&mut r)?;
    }

    let method_count = r.u2()?;
    let mut methods = Vec::with_capacity(method_count as usize);
    for _ in 0..method_count {
        let _access = r.u2()?;
        let name = pool.utf8(r.u2()?)?.to_string();
        let descriptor = pool.utf8(r.u2()?)?.to_string();
        let mut method = MethodSummary {
            name,
            descriptor,
            instruction_count: 0,
            code_length: 0,
            decoded_length: 0,
        };
        let attrs = r.u2()?;
        for _ in 0..attrs {
            let attr_name = pool.utf8(r.u2()?)?;
            let len = r.u4()? as usize;
            let body = r.take(len)?;
            if attr_name == "Code" {
                let (count, code_length, decoded) = decode_code_attribute(body)?;
                method.instruction_count = count;
                method.code_length = code_length;
                method.decoded_length = decoded;
            }
        }
        methods.push(method);
    }
    skip_attributes(&mut r)?;
    if !r.is_empty() {
        return Err(malformed("trailing bytes after class attributes"));
    }
    Ok(ClassFileSummary {
        class_name,
        major_version: major,
        methods,
    })
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedClassFile(msg.into())
}

fn skip_attributes(r: &mut ByteReader<'_>) -> Result<()> {
    let count = r.u2()?;
    for _ in 0..count {
        r.skip(2)?;
        let len = r.u4()? as usize;
        r.skip(len)?;
    }
    Ok(())
}

/// Returns (instruction count, declared code_length, decoded byte length).
fn decode_code_attribute(body: &[u8]) -> Result<(u64, u32, u32)> {
    let mut r = ByteReader::new(body);
    let _max_stack = r.u2()?;
    let _max_locals = r.u2()?;
    let code_length = r.u4()?;
    let code = r.take(code_length as usize)?;
    let count = count_instructions(code)?;
    let handlers = r.u2()?;
    r.skip(handlers as usize * 8)?;
    skip_attributes(&mut r)?;
    if !r.is_empty() {
        return Err(malformed("Code attribute length disagrees with its contents"));
    }
    Ok((count, code_length, code.len() as u32))
}

/// Walks the bytecode one instruction at a time. Fails unless the last
/// instruction ends exactly at the end of `code`.
pub fn count_instructions(code: &[u8]) -> Result<u64> {
    let mut pc = 0usize;
    let mut count = 0u64;
    while pc < code.len() {
        let len = instruction_length(code, pc)?;
        pc += len;
        count += 1;
    }
    if pc != code.len() {
        return Err(malformed(format!(
            "instruction at end of code overruns code_length {}",
            code.len()
        )));
    }
    Ok(count)
}

fn read_i32(code: &[u8], at: usize) -> Result<i32> {
    code.get(at..at + 4)
        .map(|b| i32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| malformed("switch table truncated"))
}

fn instruction_length(code: &[u8], pc: usize) -> Result<usize> {
    let op = code[pc];
    let len = match op {
        0x00..=0x0f => 1,
        0x10 => 2,
        0x11 => 3,
        0x12 => 2,
        0x13 | 0x14 => 3,
        0x15..=0x19 => 2,
        0x1a..=0x35 => 1,
        0x36..=0x3a => 2,
        0x3b..=0x83 => 1,
        0x84 => 3,
        0x85..=0x98 => 1,
        0x99..=0xa8 => 3,
        0xa9 => 2,
        0xaa => {
            let base = (pc + 4) & !3;
            let low = read_i32(code, base + 4)?;
            let high = read_i32(code, base + 8)?;
            if high < low {
                return Err(malformed(format!("tableswitch at {pc} has high < low")));
            }
            let entries = (high as i64 - low as i64 + 1) as usize;
            base + 12 + entries * 4 - pc
        }
        0xab => {
            let base = (pc + 4) & !3;
            let npairs = read_i32(code, base + 4)?;
            if npairs < 0 {
                return Err(malformed(format!("lookupswitch at {pc} has negative npairs")));
            }
            base + 8 + npairs as usize * 8 - pc
        }
        0xac..=0xb1 => 1,
        0xb2..=0xb8 => 3,
        0xb9 | 0xba => 5,
        0xbb => 3,
        0xbc => 2,
        0xbd => 3,
        0xbe | 0xbf => 1,
        0xc0 | 0xc1 => 3,
        0xc2 | 0xc3 => 1,
        0xc4 => match code.get(pc + 1) {
            Some(0x84) => 6,
            Some(0x15..=0x19) | Some(0x36..=0x3a) | Some(0xa9) => 4,
            Some(other) => return Err(malformed(format!("wide applied to opcode {other:#04x}"))),
            None => return Err(malformed("wide prefix at end of code")),
        },
        0xc5 => 4,
        0xc6 | 0xc7 => 3,
        0xc8 | 0xc9 => 5,
        _ => return Err(malformed(format!("undefined opcode {op:#04x} at {pc}"))),
    };
    if pc + len > code.len() {
        return Err(malformed(format!("opcode {op:#04x} at {pc} overruns code")));
    }
    Ok(len)
}

enum Constant {
    Utf8(String),
    Class(u16),
    Other,
    /// Second slot of a long or double.
    Unusable,
}

struct ConstantPool {
    entries: Vec<Constant>,
}

impl ConstantPool {
    fn read(r: &mut ByteReader<'_>) -> Result<Self> {
        let count = r.u2()? as usize;
        if count == 0 {
            return Err(malformed("constant_pool_count is zero"));
        }
        let mut entries = Vec::with_capacity(count);
        entries.push(Constant::Unusable);
        while entries.len() < count {
            let tag = r.u1()?;
            let entry = match tag {
                1 => {
                    let len = r.u2()? as usize;
                    Constant::Utf8(decode_modified_utf8(r.take(len)?))
                }
                7 => Constant::Class(r.u2()?),
                3 | 4 => {
                    r.skip(4)?;
                    Constant::Other
                }
                5 | 6 => {
                    r.skip(8)?;
                    entries.push(Constant::Other);
                    if entries.len() >= count {
                        return Err(malformed("long or double constant in last pool slot"));
                    }
                    Constant::Unusable
                }
                8 | 16 | 19 | 20 => {
                    r.skip(2)?;
                    Constant::Other
                }
                9 | 10 | 11 | 12 | 17 | 18 => {
                    r.skip(4)?;
                    Constant::Other
                }
                15 => {
                    r.skip(3)?;
                    Constant::Other
                }
                other => return Err(malformed(format!("unknown constant tag {other}"))),
            };
            entries.push(entry);
        }
        Ok(ConstantPool { entries })
    }

    fn utf8(&self, index: u16) -> Result<&str> {
        match self.entries.get(index as usize) {
            Some(Constant::Utf8(s)) => Ok(s),
            _ => Err(malformed(format!("constant {index} is not a Utf8 entry"))),
        }
    }

    fn class_name(&self, index: u16) -> Result<&str> {
        match self.entries.get(index as usize) {
            Some(Constant::Class(name)) => self.utf8(*name),
            _ => Err(malformed(format!("constant {index} is not a Class entry"))),
        }
    }
}

/// Decodes the JVM's modified UTF-8; invalid sequences become U+FFFD.
fn decode_modified_utf8(bytes: &[u8]) -> String {
    if bytes.is_ascii() {
        return String::from_utf8_lossy(bytes).into_owned();
    }
    let mut units: Vec<u16> = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b & 0x80 == 0 {
            units.push(b as u16);
            i += 1;
        } else if b & 0xE0 == 0xC0 && i + 1 < bytes.len() {
            units.push(((b as u16 & 0x1F) << 6) | (bytes[i + 1] as u16 & 0x3F));
            i += 2;
        } else if b & 0xF0 == 0xE0 && i + 2 < bytes.len() {
            units.push(((b as u16 & 0x0F) << 12) | ((bytes[i + 1] as u16 & 0x3F) << 6) | (bytes[i + 2] as u16 & 0x3F));
            i += 3;
        } else {
            units.push(0xFFFD);
            i += 1;
        }
    }
    String::from_utf16_lossy(&units)
}

struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        ByteReader { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| malformed(format!("truncated at byte {}", self.pos)))?;
        let slice = &self.data[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn skip(&mut self, n: usize) -> Result<()> {
        self.take(n).map(|_| ())
    }

    fn u1(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u2(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u4(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn is_empty(&self) -> bool {
        self.pos == self.data.len()
    }
}

/// Reads every `.class` entry of a jar/zip archive, in archive order.
pub fn read_archive(path: &Path, options: ReaderOptions) -> Result<Vec<ClassFileSummary>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut archive = zip::ZipArchive::new(file).map_err(|e| malformed(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for i in 0..archive.len() {
        let mut entry = archive
            .by_index(i)
            .map_err(|e| malformed(format!("{}: {e}", path.display())))?;
        if !entry.is_file() || !entry.name().ends_with(".class") {
            continue;
        }
        let name = entry.name().to_string();
        let mut bytes = Vec::with_capacity(entry.size() as usize);
        entry
            .read_to_end(&mut bytes)
            .map_err(|e| Error::io(path.join(&name), e))?;
        out.push(
            parse_classfile_with(&bytes, options).map_err(|e| malformed(format!("{}!{name}: {e}", path.display())))?,
        );
    }
    Ok(out)
}

/// Collects summaries from `.class` files and `.jar` archives under the given
/// paths (files or directories, walked in sorted order).
pub fn read_class_inputs(paths: &[impl AsRef<Path>], options: ReaderOptions) -> Result<Vec<ClassFileSummary>> {
    let mut out = Vec::new();
    for root in paths {
        for entry in walkdir::WalkDir::new(root.as_ref()).sort_by_file_name() {
            let entry = entry.map_err(|e| {
                let path = e.path().map(Path::to_path_buf).unwrap_or_default();
                Error::io(path, e.into())
            })?;
            let path = entry.path();
            if !entry.file_type().is_file() {
                continue;
            }
            match path.extension().and_then(|e| e.to_str()) {
                Some("class") => {
                    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
                    let summary = parse_classfile_with(&bytes, options).map_err(|e| match e {
                        Error::MalformedClassFile(m) => malformed(format!("{}: {m}", path.display())),
                        other => other,
                    })?;
                    out.push(summary);
                }
                Some("jar") | Some("zip") => out.extend(read_archive(path, options)?),
                _ => {}
            }
        }
    }
    Ok(out)
}

/// NBI per top-level class: nested and anonymous classes fold into their
/// enclosing top-level class.
pub fn nbi_by_top_level(summaries: &[ClassFileSummary]) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for s in summaries {
        *out.entry(s.top_level_name().to_string()).or_insert(0) += count_nbi(s);
    }
    out
}
