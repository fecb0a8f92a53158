public class ThumbnailCache {
    public Bitmap thumbnail(AssetManager am, String path) throws IOException {
        InputStream in = am.open(path);
        final BitmapFactory.Options o = new BitmapFactory.Options();
        o.inSampleSize = 8;
        Bitmap thumb = BitmapFactory.decodeStream(in, null, o);
        mCache.put(path, thumb);
        return thumb;
    }
}
