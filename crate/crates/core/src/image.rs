//! 8-bit raster images and binary PPM/PGM I/O.

use std::io::{self, BufRead, Write};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height * 3],
        }
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self { width, height, data }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Option<Self> {
        (data.len() == width * height * 3).then_some(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        let mut img = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                img.put(x, y, f(x, y));
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn as_raw_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn put(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Rec.601 luma, in [0, 255].
    pub fn luma(&self) -> Vec<f64> {
        self.data
            .chunks_exact(3)
            .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
            .collect()
    }

    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> RgbImage {
        assert!(x0 + width <= self.width && y0 + height <= self.height, "crop out of bounds");
        let mut out = RgbImage::new(width, height);
        for y in 0..height {
            let src = ((y0 + y) * self.width + x0) * 3;
            out.data[y * width * 3..(y + 1) * width * 3].copy_from_slice(&self.data[src..src + width * 3]);
        }
        out
    }

    /// Central crop keeping `fraction` of each dimension.
    pub fn center_crop(&self, fraction: f64) -> RgbImage {
        let w = ((self.width as f64 * fraction).round() as usize).clamp(1, self.width);
        let h = ((self.height as f64 * fraction).round() as usize).clamp(1, self.height);
        self.crop((self.width - w) / 2, (self.height - h) / 2, w, h)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Option<Self> {
        (data.len() == width * height).then_some(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn put(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }
}

pub fn write_ppm<W: Write>(img: &RgbImage, mut out: W) -> io::Result<()> {
    write!(out, "P6\n{} {}\n255\n", img.width, img.height)?;
    out.write_all(&img.data)
}

pub fn read_ppm<R: BufRead>(mut input: R) -> io::Result<RgbImage> {
    let (w, h, max) = read_header(&mut input, "P6")?;
    if max != 255 {
        return Err(invalid("only 8-bit PPM is supported"));
    }
    let mut data = vec![0; w * h * 3];
    input.read_exact(&mut data)?;
    Ok(RgbImage { width: w, height: h, data })
}

pub fn write_pgm<W: Write>(img: &GrayImage, mut out: W) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", img.width, img.height)?;
    out.write_all(&img.data)
}

/// Writes 16-bit samples (big-endian, as PGM requires).
pub fn write_pgm16<W: Write>(width: usize, height: usize, samples: &[u16], mut out: W) -> io::Result<()> {
    assert_eq!(samples.len(), width * height);
    write!(out, "P5\n{width} {height}\n65535\n")?;
    let bytes: Vec<u8> = samples.iter().flat_map(|v| v.to_be_bytes()).collect();
    out.write_all(&bytes)
}

/// Reads an 8- or 16-bit PGM; samples are returned widened to u16.
pub fn read_pgm<R: BufRead>(mut input: R) -> io::Result<(usize, usize, u16, Vec<u16>)> {
    let (w, h, max) = read_header(&mut input, "P5")?;
    let samples = if max < 256 {
        let mut data = vec![0u8; w * h];
        input.read_exact(&mut data)?;
        data.into_iter().map(u16::from).collect()
    } else {
        let mut data = vec![0u8; w * h * 2];
        input.read_exact(&mut data)?;
        data.chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])).collect()
    };
    Ok((w, h, max as u16, samples))
}

fn invalid(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_owned())
}

fn read_header<R: BufRead>(input: &mut R, magic: &str) -> io::Result<(usize, usize, usize)> {
    let mut fields = Vec::with_capacity(4);
    let mut token = String::new();
    let mut byte = [0u8; 1];
    let mut in_comment = false;
    while fields.len() < 4 {
        input.read_exact(&mut byte)?;
        let c = byte[0] as char;
        if in_comment {
            in_comment = c != '\n';
            continue;
        }
        if c == '#' {
            in_comment = true;
        } else if c.is_ascii_whitespace() {
            if !token.is_empty() {
                fields.push(std::mem::take(&mut token));
            }
        } else {
            token.push(c);
        }
    }
    if fields[0] != magic {
        return Err(invalid("unexpected magic number"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| invalid("bad header field"));
    let (w, h, max) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if max == 0 || max > 65535 {
        return Err(invalid("bad maxval"));
    }
    Ok((w, h, max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_roundtrip() {
        let img = RgbImage::from_fn(5, 3, |x, y| [x as u8 * 40, y as u8 * 80, 7]);
        let mut buf = Vec::new();
        write_ppm(&img, &mut buf).unwrap();
        assert!(buf.starts_with(b"P6\n5 3\n255\n"));
        assert_eq!(read_ppm(buf.as_slice()).unwrap(), img);
    }

    #[test]
    fn pgm16_is_big_endian_and_roundtrips() {
        let samples = vec![0u16, 1, 256, 65535];
        let mut buf = Vec::new();
        write_pgm16(2, 2, &samples, &mut buf).unwrap();
        assert_eq!(&buf[buf.len() - 8..], &[0, 0, 0, 1, 1, 0, 255, 255]);
        let (w, h, max, back) = read_pgm(buf.as_slice()).unwrap();
        assert_eq!((w, h, max), (2, 2, 65535));
        assert_eq!(back, samples);
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut buf = b"P6\n# made by hand\n1 1\n255\n".to_vec();
        buf.extend_from_slice(&[1, 2, 3]);
        assert_eq!(read_ppm(buf.as_slice()).unwrap().get(0, 0), [1, 2, 3]);
    }

    #[test]
    fn center_crop_keeps_the_middle() {
        let img = RgbImage::from_fn(10, 10, |x, y| [x as u8, y as u8, 0]);
        let c = img.center_crop(0.8);
        assert_eq!(c.dims(), (8, 8));
        assert_eq!(c.get(0, 0), [1, 1, 0]);
    }
}
