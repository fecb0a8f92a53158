public class StickerGridAdapter {
    public Bitmap loadSticker(AssetManager manager, String fileName) throws IOException {
        InputStream is = manager.open(fileName);
        final BitmapFactory.Options options = new BitmapFactory.Options();
        options.inSampleSize = 2;
        Bitmap bmp = BitmapFactory.decodeStream(is, null, options);
        return bmp;
    }
}
