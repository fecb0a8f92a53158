public class ImageLoader {
    public Bitmap fromAssets(Context context, String file) {
        Bitmap bitmap = null;
        try {
            InputStream stream = context.getAssets().open(file);
            bitmap = BitmapFactory.decodeStream(stream);
            stream.close();
        } catch (IOException e) {
            Log.w(TAG, e);
        }
        return bitmap;
    }

    public int countLines(String text) {
        int n = 0;
        for (int i = 0; i < text.length(); i++) {
            if (text.charAt(i) == '\n') {
                n++;
            }
        }
        return n;
    }
}
