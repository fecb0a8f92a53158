public class GalleryLoader {
    public Bitmap decodeScaled(AssetManager assets, String name) throws IOException {
        InputStream stream = assets.open(name);
        BitmapFactory.Options opts = new BitmapFactory.Options();
        opts.inSampleSize = 4;
        Bitmap result = BitmapFactory.decodeStream(stream, null, opts);
        return result;
    }
}
