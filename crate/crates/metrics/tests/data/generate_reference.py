import numpy as np, flip_evaluator as fe
from skimage.metrics import structural_similarity
rng = np.random.default_rng(20261019)
W, H = 48, 40
rows = []
def smooth(h, w):
    base = rng.random((h//8+2, w//8+2, 3))
    ys = np.linspace(0, h//8, h); xs = np.linspace(0, w//8, w)
    y0 = np.floor(ys).astype(int); x0 = np.floor(xs).astype(int)
    fy = (ys-y0)[:,None,None]; fx = (xs-x0)[None,:,None]
    a = base[y0][:,x0]; b = base[y0][:,x0+1]; c = base[y0+1][:,x0]; d = base[y0+1][:,x0+1]
    return (a*(1-fx)+b*fx)*(1-fy) + (c*(1-fx)+d*fx)*fy
def write_ppm(path, img):
    with open(path, 'wb') as f:
        f.write(b'P6\n%d %d\n255\n' % (img.shape[1], img.shape[0])); f.write(img.tobytes())
for i in range(10):
    a = smooth(H, W) * 0.8 + rng.random((H, W, 3)) * 0.2
    kind = i % 3
    if kind == 0:
        b = a + rng.normal(0, 0.05 + 0.03*i, a.shape)
    elif kind == 1:
        b = np.roll(a, 1 + i % 3, axis=1) * 0.9 + 0.05
    else:
        b = smooth(H, W)
    A = np.clip(np.round(a*255), 0, 255).astype(np.uint8)
    B = np.clip(np.round(b*255), 0, 255).astype(np.uint8)
    write_ppm(f'pair{i}_a.ppm', A); write_ppm(f'pair{i}_b.ppm', B)
    la = A.astype(np.float64) @ np.array([0.299, 0.587, 0.114])
    lb = B.astype(np.float64) @ np.array([0.299, 0.587, 0.114])
    s = structural_similarity(la, lb, data_range=255, gaussian_weights=True, sigma=1.5, use_sample_covariance=False)
    _, mean_flip, _ = fe.evaluate(A.astype(np.float32)/255, B.astype(np.float32)/255, 'LDR', applyMagma=False, parameters={'ppd': 67})
    rows.append((i, s, mean_flip))
with open('reference.csv', 'w') as f:
    f.write('pair,ssim,flip\n')
    for r in rows: f.write('%d,%.9f,%.9f\n' % r)
print(open('reference.csv').read())
